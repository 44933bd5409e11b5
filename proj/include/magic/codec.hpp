#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "magic/acquisition.hpp"
#include "magic/dictionaries.hpp"
#include "magic/geometry.hpp"
#include "magic/image.hpp"

namespace magic {

/// Rectangle (inclusive bounds) whose blocks are encoded with divisor droi
/// instead of the global d, retaining more detail.
struct RoiRect {
  std::int32_t r0 = 0, c0 = 0, r1 = 0, c1 = 0;
  std::uint32_t droi = 1;
};

struct EncodeParams {
  std::uint32_t d = 1;
  Index grid = 0;  // 0 selects the default ceil((rows+cols)/20)
  std::vector<RoiRect> roi;
};

/// One encoded image. labels/colorIndices are the payload; the remaining
/// fields are the header plus bookkeeping both endpoints derive on their
/// own (bit widths from the package, tess from the labels), kept here so
/// tests can compare endpoint geometry and decode need not re-derive it.
struct EncodedImage {
  std::uint16_t rows = 0, cols = 0, grid = 0, bDim = 0;
  std::vector<std::uint32_t> labels;
  std::vector<std::uint32_t> colorIndices;

  std::uint8_t labelBits = 0;
  std::uint8_t cb = 0;
  Triangulation tess;  // derived: triangulation shared by both endpoints

  /// Exact encoded size: ceil((64 + B*labelBits + T*cb) / 8).
  std::uint64_t bit_length() const {
    return 64 + labels.size() * labelBits + colorIndices.size() * cb;
  }
  std::uint64_t byte_length() const { return (bit_length() + 7) / 8; }
};

/// Label bit width for a pattern dictionary: ceil(log2(size)), at least 1.
std::uint8_t label_bits(std::uint32_t patternDictSize);

/// Encode: per block, entropy features drive the predictor whose label picks
/// a point-spray pattern; pattern points plus the uniform grid are
/// triangulated and each triangle's average color is palette-quantized.
EncodedImage encode(const Image& img, const KnowledgePackage& kp,
                    const EncodeParams& ep);

/// Encode with externally supplied per-block labels (row-major block order),
/// bypassing the predictor. Same wire format.
EncodedImage encode_with_labels(const Image& img, const KnowledgePackage& kp,
                                const std::vector<std::uint32_t>& labels,
                                Index grid);

/// Decode: rebuild the point set from the labels, re-triangulate (bit-equal
/// to the encoder by the determinism contract) and paint triangles in
/// canonical order, later triangles overwriting earlier at shared pixels.
/// If covered is given it receives 1 for every painted pixel.
Image decode(const EncodedImage& enc, const KnowledgePackage& kp,
             PlaneX<std::uint8_t>* covered = nullptr);

/// Wire format: header of 4 big-endian u16 (rows, cols, grid, bDim), then
/// all labels then all color indices as one MSB-first bit string, zero
/// padded to a byte boundary.
std::vector<std::uint8_t> to_bytes(const EncodedImage& enc);

/// Parses and validates a byte stream against the package: labels must fit
/// the pattern dictionary and the byte count must match the size formula
/// exactly. Throws FormatError otherwise.
EncodedImage from_bytes(std::span<const std::uint8_t> bytes,
                        const KnowledgePackage& kp);

/// Header fields of a serialized stream (for stats tooling).
struct StreamHeader {
  std::uint16_t rows = 0, cols = 0, grid = 0, bDim = 0;
};
StreamHeader read_stream_header(std::span<const std::uint8_t> bytes);

/// Decoder post-process: depth rounds of midpoint subdivision, each
/// sub-triangle repainted with half its parent's color and half the mean of
/// the parent's neighbors across the parent edges the sub-triangle touches
/// (the central sub-triangle keeps the parent color). depth 0 is identity.
Image smooth(const Image& img, const Triangulation& tess,
             const std::vector<Rgb>& triColors, int depth);

}  // namespace magic
