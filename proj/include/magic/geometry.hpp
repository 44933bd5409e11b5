#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

#include "magic/image.hpp"

namespace magic {

/// Integer pixel coordinate. Ordering is lexicographic (row, col); that
/// order doubles as the triangulation insertion order, so it is part of the
/// encoder/decoder contract.
struct Point {
  std::int32_t row = 0;
  std::int32_t col = 0;

  friend auto operator<=>(const Point&, const Point&) = default;
};

/// Strictly increasing, duplicate-free list of points.
class PointSet {
 public:
  PointSet() = default;

  /// Sorts and deduplicates.
  static PointSet from_points(std::vector<Point> pts);

  /// Set union of two point sets.
  PointSet merged(const PointSet& other) const;

  const std::vector<Point>& points() const { return pts_; }
  std::size_t size() const { return pts_.size(); }
  bool empty() const { return pts_.empty(); }
  const Point& operator[](std::size_t i) const { return pts_[i]; }

  bool operator==(const PointSet&) const = default;

 private:
  std::vector<Point> pts_;
};

/// Vertex indices into a PointSet, sorted ascending.
struct Triangle {
  std::array<std::int32_t, 3> v{};

  friend auto operator<=>(const Triangle&, const Triangle&) = default;
};

/// Delaunay triangulation in canonical order: each triangle's indices sorted
/// ascending, triangles sorted lexicographically. Canonical order is what
/// lets the decoder line its color list up with the encoder's.
struct Triangulation {
  PointSet points;
  std::vector<Triangle> triangles;
};

/// Points at every (r, c) with r in {0, grid, 2*grid, ...} union {rows-1}
/// and c likewise, so the four image corners are always present.
/// Throws std::invalid_argument if grid == 0 or the image is below 2x2.
PointSet grid_spray(Index rows, Index cols, Index grid);

/// Delaunay triangulation with exact integer predicates. Deterministic:
/// equal point sets give byte-equal triangulations on any platform.
/// Cocircular ties resolve to the triangulation whose canonical triangle
/// list is lexicographically smallest. Throws std::invalid_argument for
/// fewer than 3 points or an all-collinear set.
Triangulation delaunay(const PointSet& points);

/// All pixels whose centers lie inside or on the boundary of the triangle,
/// found by scanning its bounding rectangle. Row-major pixel indices.
std::vector<std::int64_t> triangle_pixels(const Triangle& tri,
                                          const PointSet& points, Index rows,
                                          Index cols);

/// If the population standard deviation of the member pixel intensities
/// exceeds th (strictly), returns the triangle centroid rounded to the
/// nearest in-bounds pixel; otherwise nothing.
std::optional<Point> split_triangle(const Triangle& tri, const PointSet& points,
                                    const GrayImage& gray, double th);

/// Partitions the image into non-overlapping pw x pw windows anchored at
/// (0,0) and keeps only the lexicographically smallest point per window.
PointSet prune_points(const PointSet& points, Index pw, Index rows, Index cols);

/// Canonical byte serialization (little-endian), for determinism checks and
/// cross-endpoint comparisons.
std::vector<std::uint8_t> triangulation_bytes(const Triangulation& tri);

}  // namespace magic
