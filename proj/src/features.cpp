#include "magic/features.hpp"

#include <array>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

namespace magic {
namespace {

// 5x5 integer Gaussian for sigma = 1.4 (sums to 159).
constexpr int kGauss[5][5] = {
    {2, 4, 5, 4, 2},
    {4, 9, 12, 9, 4},
    {5, 12, 15, 12, 5},
    {4, 9, 12, 9, 4},
    {2, 4, 5, 4, 2},
};
constexpr int kGaussSum = 159;

// Double thresholds applied to squared gradient magnitude.
constexpr std::int64_t kWeakSq = 50 * 50;
constexpr std::int64_t kStrongSq = 100 * 100;

}  // namespace

EntropyMap local_entropy(const GrayImage& gray, Index radius) {
  if (radius < 1) throw std::invalid_argument("local_entropy: radius must be >= 1");
  const Index rows = gray.rows(), cols = gray.cols();

  // c * log2(c) for every count a window can hold.
  const Index side = 2 * radius + 1;
  std::vector<double> clog(static_cast<std::size_t>(side * side) + 1, 0.0);
  for (std::size_t c = 2; c < clog.size(); ++c)
    clog[c] = static_cast<double>(c) * std::log2(static_cast<double>(c));

  EntropyMap em;
  em.values.resize(rows, cols);
  std::array<int, 256> hist{};
  for (Index r = 0; r < rows; ++r) {
    const Index r0 = std::max<Index>(0, r - radius);
    const Index r1 = std::min<Index>(rows - 1, r + radius);
    for (Index c = 0; c < cols; ++c) {
      const Index c0 = std::max<Index>(0, c - radius);
      const Index c1 = std::min<Index>(cols - 1, c + radius);
      hist.fill(0);
      for (Index wr = r0; wr <= r1; ++wr)
        for (Index wc = c0; wc <= c1; ++wc) ++hist[gray.values(wr, wc)];
      const Index n = (r1 - r0 + 1) * (c1 - c0 + 1);
      double s = 0.0;
      for (const int cnt : hist) s += clog[static_cast<std::size_t>(cnt)];
      // H = (n*log2 n - sum(c*log2 c))/n, the histogram form of Shannon
      // entropy. Subtracting inside the division keeps a single-bin window
      // (s == clog[n]) at exactly zero.
      em.values(r, c) = (clog[static_cast<std::size_t>(n)] - s) / static_cast<double>(n);
    }
  }
  return em;
}

Eigen::VectorXd block_features(const EntropyMap& em, Index blockRow, Index blockCol,
                               Index bDim) {
  if (bDim < 1) throw std::invalid_argument("block_features: bDim must be >= 1");
  const Index r0 = blockRow * bDim, c0 = blockCol * bDim;
  if (r0 >= em.rows() || c0 >= em.cols())
    throw std::invalid_argument("block_features: block fully outside image");

  Eigen::VectorXd x = Eigen::VectorXd::Zero(bDim * bDim);
  const Index rEnd = std::min(em.rows(), r0 + bDim);
  const Index cEnd = std::min(em.cols(), c0 + bDim);
  for (Index r = r0; r < rEnd; ++r)
    for (Index c = c0; c < cEnd; ++c)
      x((r - r0) * bDim + (c - c0)) = em.values(r, c) / 8.0;
  return x;
}

PointSet edge_points(const GrayImage& gray) {
  const Index rows = gray.rows(), cols = gray.cols();

  // Gaussian blur with clamped borders; exact integer rounding.
  PlaneX<std::int32_t> blur(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      std::int64_t acc = 0;
      for (Index i = -2; i <= 2; ++i) {
        const Index rr = std::clamp<Index>(r + i, 0, rows - 1);
        for (Index j = -2; j <= 2; ++j) {
          const Index cc = std::clamp<Index>(c + j, 0, cols - 1);
          acc += static_cast<std::int64_t>(kGauss[i + 2][j + 2]) * gray.values(rr, cc);
        }
      }
      blur(r, c) = static_cast<std::int32_t>((acc + kGaussSum / 2) / kGaussSum);
    }
  }

  // Sobel gradients on the interior; borders stay zero.
  PlaneX<std::int32_t> gx = PlaneX<std::int32_t>::Zero(rows, cols);
  PlaneX<std::int32_t> gy = PlaneX<std::int32_t>::Zero(rows, cols);
  PlaneX<std::int64_t> g2 = PlaneX<std::int64_t>::Zero(rows, cols);
  for (Index r = 1; r + 1 < rows; ++r) {
    for (Index c = 1; c + 1 < cols; ++c) {
      const std::int32_t sx = (blur(r - 1, c + 1) + 2 * blur(r, c + 1) + blur(r + 1, c + 1)) -
                              (blur(r - 1, c - 1) + 2 * blur(r, c - 1) + blur(r + 1, c - 1));
      const std::int32_t sy = (blur(r + 1, c - 1) + 2 * blur(r + 1, c) + blur(r + 1, c + 1)) -
                              (blur(r - 1, c - 1) + 2 * blur(r - 1, c) + blur(r - 1, c + 1));
      gx(r, c) = sx;
      gy(r, c) = sy;
      g2(r, c) = static_cast<std::int64_t>(sx) * sx + static_cast<std::int64_t>(sy) * sy;
    }
  }

  // Non-maximum suppression. The gradient direction picks one of four
  // neighbor axes; sector tests use tan(22.5) ~ 4142/10000 and
  // tan(67.5) ~ 24142/10000 in cross-multiplied integer form.
  PlaneX<std::uint8_t> keep = PlaneX<std::uint8_t>::Zero(rows, cols);
  for (Index r = 1; r + 1 < rows; ++r) {
    for (Index c = 1; c + 1 < cols; ++c) {
      if (g2(r, c) < kWeakSq) continue;
      const std::int64_t ax = std::abs(gx(r, c)), ay = std::abs(gy(r, c));
      Index dr, dc;
      if (ay * 10000 < ax * 4142) {
        dr = 0; dc = 1;  // near-horizontal gradient: compare left/right
      } else if (ay * 10000 <= ax * 24142) {
        // Diagonal: sign of gx*gy picks which diagonal the gradient runs.
        const bool same = (gx(r, c) >= 0) == (gy(r, c) >= 0);
        dr = 1; dc = same ? 1 : -1;
      } else {
        dr = 1; dc = 0;  // near-vertical gradient: compare up/down
      }
      if (g2(r, c) >= g2(r - dr, c - dc) && g2(r, c) >= g2(r + dr, c + dc))
        keep(r, c) = 1;
    }
  }

  // Hysteresis: strong pixels seed a BFS through weak 8-neighbors.
  PlaneX<std::uint8_t> edge = PlaneX<std::uint8_t>::Zero(rows, cols);
  std::deque<std::pair<Index, Index>> queue;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      if (keep(r, c) && g2(r, c) >= kStrongSq) {
        edge(r, c) = 1;
        queue.emplace_back(r, c);
      }
  while (!queue.empty()) {
    const auto [r, c] = queue.front();
    queue.pop_front();
    for (Index dr = -1; dr <= 1; ++dr) {
      for (Index dc = -1; dc <= 1; ++dc) {
        const Index rr = r + dr, cc = c + dc;
        if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
        if (edge(rr, cc) || !keep(rr, cc)) continue;
        edge(rr, cc) = 1;
        queue.emplace_back(rr, cc);
      }
    }
  }

  std::vector<Point> pts;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      if (edge(r, c))
        pts.push_back({static_cast<std::int32_t>(r), static_cast<std::int32_t>(c)});
  return PointSet::from_points(std::move(pts));
}

}  // namespace magic
