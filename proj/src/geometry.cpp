#include "magic/geometry.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstring>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace magic {
namespace {

using int128 = __int128;

// ---------------------------------------------------------------------------
// Exact predicates.
//
// The triangulation runs Bowyer-Watson over the real points plus three
// enclosing vertices placed at t*D[k] for t -> infinity. Predicates touching
// those vertices are evaluated symbolically: every determinant entry is a
// polynomial in t, and the sign of the predicate is the sign of the leading
// non-zero coefficient. Coordinates are 16-bit pixel integers, so all
// coefficients fit comfortably in 128 bits.
// ---------------------------------------------------------------------------

// Directions of the three far vertices, pairwise non-parallel, CCW.
constexpr std::array<std::array<std::int64_t, 2>, 3> kFarDir = {{
    {-1, -1},
    {1, -1},
    {0, 1},
}};

struct Poly {
  std::array<int128, 5> c{};  // c[i] multiplies t^i

  static Poly constant(int128 v) {
    Poly p;
    p.c[0] = v;
    return p;
  }

  Poly operator+(const Poly& o) const {
    Poly r;
    for (int i = 0; i < 5; ++i) r.c[i] = c[i] + o.c[i];
    return r;
  }

  Poly operator-(const Poly& o) const {
    Poly r;
    for (int i = 0; i < 5; ++i) r.c[i] = c[i] - o.c[i];
    return r;
  }

  Poly operator*(const Poly& o) const {
    Poly r;
    for (int i = 0; i < 5; ++i) {
      if (c[i] == 0) continue;
      for (int j = 0; j < 5; ++j) {
        if (o.c[j] == 0) continue;
        assert(i + j < 5);
        r.c[i + j] += c[i] * o.c[j];
      }
    }
    return r;
  }

  int sign() const {
    for (int i = 4; i >= 0; --i) {
      if (c[i] > 0) return 1;
      if (c[i] < 0) return -1;
    }
    return 0;
  }
};

inline int sign_of(int128 v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

// Plane coordinates are (x, y) = (col, row).
class Mesh {
 public:
  explicit Mesh(const std::vector<Point>& pts) : pts_(pts), n_(static_cast<int>(pts.size())) {}

  bool is_far(int v) const { return v >= n_; }

  Poly px(int v) const {
    if (v < n_) return Poly::constant(pts_[v].col);
    Poly p;
    p.c[1] = kFarDir[v - n_][0];
    return p;
  }

  Poly py(int v) const {
    if (v < n_) return Poly::constant(pts_[v].row);
    Poly p;
    p.c[1] = kFarDir[v - n_][1];
    return p;
  }

  // Sign of cross(b - a, c - a); > 0 means (a, b, c) is CCW.
  int orient(int a, int b, int c) const {
    if (!is_far(a) && !is_far(b) && !is_far(c)) {
      const int128 abx = pts_[b].col - pts_[a].col;
      const int128 aby = pts_[b].row - pts_[a].row;
      const int128 acx = pts_[c].col - pts_[a].col;
      const int128 acy = pts_[c].row - pts_[a].row;
      return sign_of(abx * acy - aby * acx);
    }
    const Poly abx = px(b) - px(a), aby = py(b) - py(a);
    const Poly acx = px(c) - px(a), acy = py(c) - py(a);
    return (abx * acy - aby * acx).sign();
  }

  // > 0 iff real point p lies strictly inside the circumdisk of CCW (a,b,c).
  int in_disk(int a, int b, int c, int p) const {
    if (!is_far(a) && !is_far(b) && !is_far(c)) {
      const int128 ax = pts_[a].col - pts_[p].col, ay = pts_[a].row - pts_[p].row;
      const int128 bx = pts_[b].col - pts_[p].col, by = pts_[b].row - pts_[p].row;
      const int128 cx = pts_[c].col - pts_[p].col, cy = pts_[c].row - pts_[p].row;
      const int128 na = ax * ax + ay * ay;
      const int128 nb = bx * bx + by * by;
      const int128 nc = cx * cx + cy * cy;
      const int128 det = ax * (by * nc - cy * nb) - ay * (bx * nc - cx * nb) +
                         na * (bx * cy - cx * by);
      return sign_of(det);
    }
    const Poly ppx = px(p), ppy = py(p);
    const Poly ax = px(a) - ppx, ay = py(a) - ppy;
    const Poly bx = px(b) - ppx, by = py(b) - ppy;
    const Poly cx = px(c) - ppx, cy = py(c) - ppy;
    const Poly na = ax * ax + ay * ay;
    const Poly nb = bx * bx + by * by;
    const Poly nc = cx * cx + cy * cy;
    const Poly det =
        ax * (by * nc - cy * nb) - ay * (bx * nc - cx * nb) + na * (bx * cy - cx * by);
    return det.sign();
  }

  int vertex_count() const { return n_; }

 private:
  const std::vector<Point>& pts_;
  int n_;
};

struct TriRec {
  std::array<int, 3> v;    // CCW vertex indices
  std::array<int, 3> nbr;  // nbr[k] is across the edge opposite v[k]
  bool alive = true;
};

class BowyerWatson {
 public:
  explicit BowyerWatson(const std::vector<Point>& pts) : mesh_(pts) {
    const int n = mesh_.vertex_count();
    tris_.push_back({{n, n + 1, n + 2}, {-1, -1, -1}, true});
    for (int i = 0; i < n; ++i) insert(i);
  }

  std::vector<Triangle> real_triangles() const {
    const int n = mesh_.vertex_count();
    std::vector<Triangle> out;
    for (const TriRec& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
      Triangle tri{{t.v[0], t.v[1], t.v[2]}};
      std::sort(tri.v.begin(), tri.v.end());
      out.push_back(tri);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  int in_disk(int tri, int p) const {
    return mesh_.in_disk(tris_[tri].v[0], tris_[tri].v[1], tris_[tri].v[2], p);
  }

  int locate(int p) const {
    int cur = hint_, prev = -1;
    for (;;) {
      assert(tris_[cur].alive);
      bool moved = false;
      for (int k = 0; k < 3 && !moved; ++k) {
        const int nb = tris_[cur].nbr[k];
        if (nb == -1 || nb == prev) continue;
        const int a = tris_[cur].v[(k + 1) % 3];
        const int b = tris_[cur].v[(k + 2) % 3];
        if (mesh_.orient(a, b, p) < 0) {
          prev = cur;
          cur = nb;
          moved = true;
        }
      }
      if (!moved) return cur;
    }
  }

  // Memoized strict circumdisk test for the point being inserted.
  bool covers(int tri, int p) {
    if (mark_[tri] != epoch_) {
      mark_[tri] = epoch_;
      in_[tri] = in_disk(tri, p) > 0;
    }
    return in_[tri];
  }

  void insert(int p) {
    ++epoch_;
    mark_.resize(tris_.size(), 0);
    in_.resize(tris_.size(), 0);
    qmark_.resize(tris_.size(), 0);

    // Seed the cavity. The located triangle's closed region contains p, so
    // either it or an immediate neighbor has p strictly inside its disk; the
    // exception is p sitting on a region boundary, hence the fallback scan.
    int seed = locate(p);
    if (!covers(seed, p)) {
      int found = -1;
      for (int k = 0; k < 3 && found == -1; ++k) {
        const int nb = tris_[seed].nbr[k];
        if (nb != -1 && covers(nb, p)) found = nb;
      }
      for (int t = 0; t < static_cast<int>(tris_.size()) && found == -1; ++t)
        if (tris_[t].alive && covers(t, p)) found = t;
      if (found == -1) throw std::logic_error("delaunay: cavity seed not found");
      seed = found;
    }

    // Grow the cavity: all connected triangles whose circumdisk strictly
    // contains p. The strict test is the cocircular tie rule: a point on a
    // circle never evicts the triangle that owns it.
    cavity_.clear();
    boundary_.clear();
    stack_.clear();
    stack_.push_back(seed);
    qmark_[seed] = epoch_;
    while (!stack_.empty()) {
      const int t = stack_.back();
      stack_.pop_back();
      cavity_.push_back(t);
      for (int k = 0; k < 3; ++k) {
        const int nb = tris_[t].nbr[k];
        const int a = tris_[t].v[(k + 1) % 3];
        const int b = tris_[t].v[(k + 2) % 3];
        if (nb == -1 || !covers(nb, p)) {
          boundary_.push_back({a, b, nb});
        } else if (qmark_[nb] != epoch_) {
          qmark_[nb] = epoch_;
          stack_.push_back(nb);
        }
      }
    }

    for (const int t : cavity_) tris_[t].alive = false;

    // Fan p to the boundary polygon. Boundary edges are CCW in their cavity
    // triangle, so (a, b, p) is CCW.
    start_at_.clear();
    end_at_.clear();
    const int first_new = static_cast<int>(tris_.size());
    for (const auto& [a, b, outer] : boundary_) {
      const int id = static_cast<int>(tris_.size());
      tris_.push_back({{a, b, p}, {-1, -1, outer}, true});
      assert(mesh_.orient(a, b, p) > 0 && "degenerate fan triangle");
      if (outer != -1) {
        // The outer triangle sees the shared edge reversed.
        TriRec& o = tris_[outer];
        for (int k = 0; k < 3; ++k)
          if (o.v[(k + 1) % 3] == b && o.v[(k + 2) % 3] == a) o.nbr[k] = id;
      }
      start_at_[a] = id;
      end_at_[b] = id;
    }
    // Link fan siblings: edge (b, p) of the tri on (a, b) meets the tri that
    // starts at b; edge (p, a) meets the tri that ends at a.
    for (int id = first_new; id < static_cast<int>(tris_.size()); ++id) {
      const int a = tris_[id].v[0];
      const int b = tris_[id].v[1];
      tris_[id].nbr[0] = start_at_.at(b);  // across (b, p)
      tris_[id].nbr[1] = end_at_.at(a);    // across (p, a)
    }
    hint_ = first_new;
  }

  Mesh mesh_;
  std::vector<TriRec> tris_;
  std::vector<int> mark_, qmark_;
  std::vector<char> in_;
  std::vector<int> cavity_;
  std::vector<int> stack_;
  std::vector<std::array<int, 3>> boundary_;  // a, b, outer neighbor
  std::unordered_map<int, int> start_at_, end_at_;
  int hint_ = 0;
  int epoch_ = 0;
};

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

PointSet PointSet::from_points(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  PointSet ps;
  ps.pts_ = std::move(pts);
  return ps;
}

PointSet PointSet::merged(const PointSet& other) const {
  std::vector<Point> all;
  all.reserve(pts_.size() + other.pts_.size());
  std::merge(pts_.begin(), pts_.end(), other.pts_.begin(), other.pts_.end(),
             std::back_inserter(all));
  all.erase(std::unique(all.begin(), all.end()), all.end());
  PointSet ps;
  ps.pts_ = std::move(all);
  return ps;
}

PointSet grid_spray(Index rows, Index cols, Index grid) {
  if (grid < 1) throw std::invalid_argument("grid_spray: grid must be >= 1");
  if (rows < 2 || cols < 2) throw std::invalid_argument("grid_spray: image must be at least 2x2");

  const auto axis = [&](Index dim) {
    std::vector<std::int32_t> v;
    for (Index x = 0; x < dim; x += grid) v.push_back(static_cast<std::int32_t>(x));
    if (v.back() != dim - 1) v.push_back(static_cast<std::int32_t>(dim - 1));
    return v;
  };
  const std::vector<std::int32_t> rs = axis(rows), cs = axis(cols);

  std::vector<Point> pts;
  pts.reserve(rs.size() * cs.size());
  for (const std::int32_t r : rs)
    for (const std::int32_t c : cs) pts.push_back({r, c});
  return PointSet::from_points(std::move(pts));
}

Triangulation delaunay(const PointSet& points) {
  if (points.size() < 3)
    throw std::invalid_argument("delaunay: need at least 3 points");

  BowyerWatson bw(points.points());
  Triangulation tri;
  tri.points = points;
  tri.triangles = bw.real_triangles();
  if (tri.triangles.empty())
    throw std::invalid_argument("delaunay: all points are collinear");
  return tri;
}

std::vector<std::int64_t> triangle_pixels(const Triangle& tri, const PointSet& points,
                                          Index rows, Index cols) {
  const Point& a = points[static_cast<std::size_t>(tri.v[0])];
  const Point& b = points[static_cast<std::size_t>(tri.v[1])];
  const Point& c = points[static_cast<std::size_t>(tri.v[2])];

  const Index r0 = std::max<Index>(0, std::min({a.row, b.row, c.row}));
  const Index r1 = std::min<Index>(rows - 1, std::max({a.row, b.row, c.row}));
  const Index c0 = std::max<Index>(0, std::min({a.col, b.col, c.col}));
  const Index c1 = std::min<Index>(cols - 1, std::max({a.col, b.col, c.col}));

  const auto edge = [](const Point& p, const Point& q, std::int64_t r, std::int64_t cc) {
    return static_cast<std::int64_t>(q.col - p.col) * (r - p.row) -
           static_cast<std::int64_t>(q.row - p.row) * (cc - p.col);
  };

  std::vector<std::int64_t> out;
  for (Index r = r0; r <= r1; ++r) {
    for (Index cc = c0; cc <= c1; ++cc) {
      const std::int64_t s0 = edge(a, b, r, cc);
      const std::int64_t s1 = edge(b, c, r, cc);
      const std::int64_t s2 = edge(c, a, r, cc);
      const bool all_np = s0 <= 0 && s1 <= 0 && s2 <= 0;
      const bool all_nn = s0 >= 0 && s1 >= 0 && s2 >= 0;
      if (all_np || all_nn) out.push_back(r * cols + cc);
    }
  }
  return out;
}

std::optional<Point> split_triangle(const Triangle& tri, const PointSet& points,
                                    const GrayImage& gray, double th) {
  const std::vector<std::int64_t> pix =
      triangle_pixels(tri, points, gray.rows(), gray.cols());
  if (pix.empty()) return std::nullopt;

  std::uint64_t sum = 0, sumsq = 0;
  for (const std::int64_t idx : pix) {
    const std::uint64_t v = gray.values(idx / gray.cols(), idx % gray.cols());
    sum += v;
    sumsq += v * v;
  }
  const double n = static_cast<double>(pix.size());
  const double mean = static_cast<double>(sum) / n;
  const double var = static_cast<double>(sumsq) / n - mean * mean;
  if (std::sqrt(std::max(0.0, var)) <= th) return std::nullopt;

  const Point& a = points[static_cast<std::size_t>(tri.v[0])];
  const Point& b = points[static_cast<std::size_t>(tri.v[1])];
  const Point& c = points[static_cast<std::size_t>(tri.v[2])];
  const auto centroid = [](std::int64_t x0, std::int64_t x1, std::int64_t x2) {
    return static_cast<std::int32_t>(std::llround((x0 + x1 + x2) / 3.0));
  };
  Point p{centroid(a.row, b.row, c.row), centroid(a.col, b.col, c.col)};
  p.row = std::clamp<std::int32_t>(p.row, 0, static_cast<std::int32_t>(gray.rows() - 1));
  p.col = std::clamp<std::int32_t>(p.col, 0, static_cast<std::int32_t>(gray.cols() - 1));
  return p;
}

PointSet prune_points(const PointSet& points, Index pw, Index rows, Index cols) {
  (void)rows;
  (void)cols;
  if (pw < 1) throw std::invalid_argument("prune_points: pw must be >= 1");
  if (pw == 1) return points;

  // Input is sorted, so the first point seen in each window is its
  // lexicographic minimum, and the kept subsequence stays sorted.
  std::vector<Point> kept;
  std::set<std::pair<std::int64_t, std::int64_t>> taken;
  for (const Point& p : points.points()) {
    const std::pair<std::int64_t, std::int64_t> key{p.row / pw, p.col / pw};
    if (taken.insert(key).second) kept.push_back(p);
  }
  return PointSet::from_points(std::move(kept));
}

std::vector<std::uint8_t> triangulation_bytes(const Triangulation& tri) {
  std::vector<std::uint8_t> out;
  append_u32(out, static_cast<std::uint32_t>(tri.points.size()));
  for (const Point& p : tri.points.points()) {
    append_u32(out, static_cast<std::uint32_t>(p.row));
    append_u32(out, static_cast<std::uint32_t>(p.col));
  }
  append_u32(out, static_cast<std::uint32_t>(tri.triangles.size()));
  for (const Triangle& t : tri.triangles)
    for (const std::int32_t v : t.v) append_u32(out, static_cast<std::uint32_t>(v));
  return out;
}

}  // namespace magic
