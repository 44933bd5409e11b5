#pragma once

#include <Eigen/Dense>

#include "magic/geometry.hpp"
#include "magic/image.hpp"

namespace magic {

/// Per-pixel Shannon entropy (bits) of the local intensity histogram.
struct EntropyMap {
  PlaneX<double> values;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

/// Default window radius: an 11x11 square neighborhood. Shared by
/// acquisition and the encoder so predictor inputs line up.
inline constexpr Index kEntropyRadius = 5;

/// Entropy of the 256-bin histogram over the (2*radius+1)^2 window centered
/// at each pixel, clipped at the image borders. Values lie in [0, 8].
EntropyMap local_entropy(const GrayImage& gray, Index radius);

/// Row-major flattened bDim^2 feature vector for the block anchored at
/// (blockRow*bDim, blockCol*bDim): entropy / 8, zero-padded where the block
/// hangs past the image. Throws std::invalid_argument if the block lies
/// fully outside.
Eigen::VectorXd block_features(const EntropyMap& em, Index blockRow,
                               Index blockCol, Index bDim);

/// Simplified Canny detector: 5x5 Gaussian blur (sigma 1.4), Sobel
/// gradients, non-maximum suppression, double threshold at gradient
/// magnitudes 50/100, hysteresis with 8-connectivity. Fully integer, hence
/// deterministic across platforms.
PointSet edge_points(const GrayImage& gray);

}  // namespace magic
