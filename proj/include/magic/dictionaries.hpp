#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "magic/geometry.hpp"
#include "magic/image.hpp"

namespace magic {

using Rgb = std::array<std::uint8_t, 3>;

/// Triangle colors observed during acquisition, keyed by RGB with their
/// occurrence counts. Ordered map so iteration (and everything seeded from
/// it) is deterministic.
using WeightedColorSet = std::map<Rgb, std::uint64_t>;

/// Seeded point-spray patterns for one block size. Entry i is the first
/// min(i, bDim^2) positions of a fixed shuffled enumeration of the block, so
/// entries are nested: entry(i) is a subset of entry(i+1). The dictionary is
/// fully determined by (bDim, size, seed) and is regenerated, not stored.
struct PatternDictionary {
  Index bDim = 0;
  std::uint32_t size = 0;
  std::uint64_t seed = 0;
  std::vector<Point> permutation;  // all bDim^2 block-local offsets, shuffled

  std::uint32_t max_label() const { return size - 1; }
};

/// Palette of exactly 2^cb RGB entries from weighted k-means.
struct ColorDictionary {
  int cb = 0;
  std::vector<Rgb> entries;
};

PatternDictionary gen_pattern_dict(Index bDim, std::uint32_t size, std::uint64_t seed);

/// Entry(label) translated to absolute coordinates for the block anchored at
/// (blockRow*bDim, blockCol*bDim); points landing outside the rows x cols
/// image are dropped. Throws std::invalid_argument for label >= size.
std::vector<Point> pattern_for_block(const PatternDictionary& pd, std::uint32_t label,
                                     Index blockRow, Index blockCol, Index rows,
                                     Index cols);

/// Weighted Lloyd's algorithm with k-means++ seeding, k = 2^cb. Stops when
/// no centroid moves more than 0.5 (RGB units) or after maxIters rounds.
/// Empty clusters re-seed to the point with the largest weighted squared
/// distance to its centroid. If sseLog is given, the weighted SSE after each
/// assignment step is appended (it is non-increasing).
/// Throws std::invalid_argument if colors is empty.
ColorDictionary kmeans_palette(const WeightedColorSet& colors, int cb, int maxIters,
                               std::uint64_t seed,
                               std::vector<double>* sseLog = nullptr);

/// Index of the entry with minimal squared RGB distance; ties break to the
/// smallest index.
std::uint32_t quantize_color(const ColorDictionary& cd, const Rgb& rgb);

/// Per-channel mean, rounded half up. Empty pixel lists signal a degenerate
/// triangle by returning nothing; callers substitute dictionary entry 0.
std::optional<Rgb> avg_triangle_color(const Image& img,
                                      const std::vector<std::int64_t>& pixels);

}  // namespace magic
