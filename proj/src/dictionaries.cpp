#include "magic/dictionaries.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "magic/rng.hpp"

namespace magic {
namespace {

using Eigen::Vector3d;

Vector3d to_vec(const Rgb& c) {
  return Vector3d(static_cast<double>(c[0]), static_cast<double>(c[1]),
                  static_cast<double>(c[2]));
}

}  // namespace

PatternDictionary gen_pattern_dict(Index bDim, std::uint32_t size, std::uint64_t seed) {
  if (bDim < 1) throw std::invalid_argument("gen_pattern_dict: bDim must be >= 1");
  if (size < 1) throw std::invalid_argument("gen_pattern_dict: size must be >= 1");

  PatternDictionary pd;
  pd.bDim = bDim;
  pd.size = size;
  pd.seed = seed;
  pd.permutation.reserve(static_cast<std::size_t>(bDim * bDim));
  for (Index r = 0; r < bDim; ++r)
    for (Index c = 0; c < bDim; ++c)
      pd.permutation.push_back(
          {static_cast<std::int32_t>(r), static_cast<std::int32_t>(c)});
  SplitMix64 rng(seed);
  shuffle(pd.permutation, rng);
  return pd;
}

std::vector<Point> pattern_for_block(const PatternDictionary& pd, std::uint32_t label,
                                     Index blockRow, Index blockCol, Index rows,
                                     Index cols) {
  if (label >= pd.size)
    throw std::invalid_argument("pattern_for_block: label out of range");

  const std::size_t count =
      std::min<std::size_t>(label, pd.permutation.size());
  const std::int32_t rOff = static_cast<std::int32_t>(blockRow * pd.bDim);
  const std::int32_t cOff = static_cast<std::int32_t>(blockCol * pd.bDim);

  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Point p{pd.permutation[i].row + rOff, pd.permutation[i].col + cOff};
    if (p.row < rows && p.col < cols) out.push_back(p);
  }
  return out;
}

ColorDictionary kmeans_palette(const WeightedColorSet& colors, int cb, int maxIters,
                               std::uint64_t seed, std::vector<double>* sseLog) {
  if (colors.empty()) throw std::invalid_argument("kmeans_palette: no colors");
  if (cb < 1 || cb > 24) throw std::invalid_argument("kmeans_palette: cb out of range");

  const std::size_t k = std::size_t{1} << cb;
  std::vector<Vector3d> pts;
  std::vector<double> wts;
  pts.reserve(colors.size());
  for (const auto& [rgb, freq] : colors) {
    pts.push_back(to_vec(rgb));
    wts.push_back(static_cast<double>(freq));
  }
  const std::size_t n = pts.size();

  // Greedy k-means++ seeding: the first centroid is drawn by weight; every
  // later seat samples a handful of candidates by weighted squared distance
  // to the nearest chosen centroid and keeps the candidate that lowers the
  // total potential the most. The greedy step makes the seeding robust on
  // well-separated clusters, where plain k-means++ occasionally double-seeds
  // a cluster. Once every point coincides with a centroid the remaining
  // seats duplicate the first pick.
  SplitMix64 rng(seed);
  std::vector<Vector3d> cent(k);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  const int nCand = 2 + static_cast<int>(std::log(static_cast<double>(k)));
  const auto pick = [&](const std::vector<double>& mass) -> std::ptrdiff_t {
    double total = 0.0;
    for (const double m : mass) total += m;
    if (total <= 0.0) return -1;
    const double target = rng.next_unit() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += mass[i];
      if (target < acc) return static_cast<std::ptrdiff_t>(i);
    }
    return static_cast<std::ptrdiff_t>(n - 1);
  };
  cent[0] = pts[static_cast<std::size_t>(pick(wts))];
  for (std::size_t i = 0; i < n; ++i) d2[i] = (pts[i] - cent[0]).squaredNorm();
  std::vector<double> mass(n);
  for (std::size_t j = 1; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) mass[i] = wts[i] * d2[i];
    std::ptrdiff_t bestIdx = -1;
    double bestPot = std::numeric_limits<double>::infinity();
    for (int t = 0; t < nCand; ++t) {
      const std::ptrdiff_t idx = pick(mass);
      if (idx < 0) break;
      double pot = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        pot += wts[i] *
               std::min(d2[i], (pts[i] - pts[static_cast<std::size_t>(idx)]).squaredNorm());
      if (pot < bestPot) {
        bestPot = pot;
        bestIdx = idx;
      }
    }
    if (bestIdx < 0) {
      cent[j] = cent[0];
      continue;
    }
    cent[j] = pts[static_cast<std::size_t>(bestIdx)];
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], (pts[i] - cent[j]).squaredNorm());
  }

  std::vector<std::size_t> assign(n);
  std::vector<double> bestD2(n);
  const auto assign_all = [&]() {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double bd = (pts[i] - cent[0]).squaredNorm();
      for (std::size_t j = 1; j < k; ++j) {
        const double d = (pts[i] - cent[j]).squaredNorm();
        if (d < bd) {
          bd = d;
          best = j;
        }
      }
      assign[i] = best;
      bestD2[i] = bd;
      sse += wts[i] * bd;
    }
    return sse;
  };

  for (int iter = 0; iter < maxIters; ++iter) {
    const double sse = assign_all();
    if (sseLog) sseLog->push_back(sse);

    std::vector<Vector3d> sum(k, Vector3d::Zero());
    std::vector<double> wsum(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[assign[i]] += wts[i] * pts[i];
      wsum[assign[i]] += wts[i];
    }

    // Re-seed empty clusters to the worst-served point, then retire that
    // point's distance so two empties never grab the same spot.
    std::vector<double> claim = bestD2;
    for (std::size_t j = 0; j < k; ++j) {
      if (wsum[j] > 0.0) continue;
      std::size_t far = 0;
      double best = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double m = wts[i] * claim[i];
        if (m > best) {
          best = m;
          far = i;
        }
      }
      sum[j] = wts[far] * pts[far];
      wsum[j] = wts[far];
      claim[far] = 0.0;
    }

    double maxMove = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const Vector3d next = sum[j] / wsum[j];
      maxMove = std::max(maxMove, (next - cent[j]).norm());
      cent[j] = next;
    }
    if (maxMove <= 0.5) break;
  }

  ColorDictionary cd;
  cd.cb = cb;
  cd.entries.reserve(k);
  for (const Vector3d& c : cent) {
    Rgb rgb;
    for (int ch = 0; ch < 3; ++ch)
      rgb[static_cast<std::size_t>(ch)] = static_cast<std::uint8_t>(
          std::clamp<long long>(std::llround(c[ch]), 0, 255));
    cd.entries.push_back(rgb);
  }
  return cd;
}

std::uint32_t quantize_color(const ColorDictionary& cd, const Rgb& rgb) {
  std::uint32_t best = 0;
  std::int64_t bd = std::numeric_limits<std::int64_t>::max();
  for (std::size_t j = 0; j < cd.entries.size(); ++j) {
    std::int64_t d = 0;
    for (int ch = 0; ch < 3; ++ch) {
      const std::int64_t diff = static_cast<std::int64_t>(cd.entries[j][ch]) -
                                static_cast<std::int64_t>(rgb[ch]);
      d += diff * diff;
    }
    if (d < bd) {
      bd = d;
      best = static_cast<std::uint32_t>(j);
    }
  }
  return best;
}

std::optional<Rgb> avg_triangle_color(const Image& img,
                                      const std::vector<std::int64_t>& pixels) {
  if (pixels.empty()) return std::nullopt;
  std::uint64_t sum[3] = {0, 0, 0};
  for (const std::int64_t idx : pixels)
    for (int ch = 0; ch < 3; ++ch) sum[ch] += img.pixels(idx, ch);
  const std::uint64_t n = pixels.size();
  Rgb out;
  for (int ch = 0; ch < 3; ++ch)
    out[static_cast<std::size_t>(ch)] =
        static_cast<std::uint8_t>((2 * sum[ch] + n) / (2 * n));  // round half up
  return out;
}

}  // namespace magic
