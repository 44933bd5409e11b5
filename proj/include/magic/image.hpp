#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>

namespace magic {

using Index = Eigen::Index;

/// Row-major raster plane; the storage type for grayscale images, entropy
/// maps and any other per-pixel scalar field.
template <typename Scalar>
using PlaneX =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Header fields of the wire format are 16 bits, so images larger than this
/// per side are rejected at the door.
inline constexpr Index kMaxImageDim = 65535;

/// 8-bit RGB image. Pixels are stored interleaved, one row of the matrix per
/// pixel in row-major raster order, so pixel (r, c) is row r*cols + c.
struct Image {
  Index rows = 0;
  Index cols = 0;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 3, Eigen::RowMajor> pixels;

  static Image filled(Index rows, Index cols, std::uint8_t r, std::uint8_t g,
                      std::uint8_t b);

  Index pixel_count() const { return rows * cols; }

  auto at(Index r, Index c) { return pixels.row(r * cols + c); }
  auto at(Index r, Index c) const { return pixels.row(r * cols + c); }

  bool operator==(const Image& o) const {
    return rows == o.rows && cols == o.cols && pixels == o.pixels;
  }
};

/// 8-bit intensity raster.
struct GrayImage {
  PlaneX<std::uint8_t> values;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }

  bool operator==(const GrayImage& o) const { return values == o.values; }
};

/// Decodes a PNG (RGB or RGBA, alpha discarded) or binary PPM (P6) file.
/// Throws IoError if the file cannot be read, FormatError for unsupported or
/// malformed content and for dimensions that do not fit the 16-bit header.
Image load_image(const std::filesystem::path& path);

/// Writes 8-bit RGB as PNG or PPM (P6), chosen by file extension
/// (.png / .ppm). Lossless: load_image(save_image(img)) == img.
void save_image(const Image& img, const std::filesystem::path& path);

/// BT.601 luma, round half up: round(0.299 R + 0.587 G + 0.114 B).
/// Gray inputs (R == G == B) map to themselves.
GrayImage to_gray(const Image& img);

}  // namespace magic
