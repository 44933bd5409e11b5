#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "magic/dictionaries.hpp"
#include "magic/image.hpp"
#include "magic/rng.hpp"

using namespace magic;

namespace {

double weighted_sse(const WeightedColorSet& colors, const ColorDictionary& cd) {
  double sse = 0.0;
  for (const auto& [rgb, w] : colors) {
    double best = 1e300;
    for (const Rgb& e : cd.entries) {
      double d = 0.0;
      for (int ch = 0; ch < 3; ++ch) {
        const double diff = static_cast<double>(e[static_cast<std::size_t>(ch)]) -
                            static_cast<double>(rgb[static_cast<std::size_t>(ch)]);
        d += diff * diff;
      }
      best = std::min(best, d);
    }
    sse += static_cast<double>(w) * best;
  }
  return sse;
}

}  // namespace

TEST_CASE("pattern dictionary: permutation, nesting, determinism") {
  const PatternDictionary pd = gen_pattern_dict(8, 4096, 42);
  CHECK(pd.bDim == 8);
  CHECK(pd.size == 4096);
  CHECK(pd.max_label() == 4095);
  REQUIRE(pd.permutation.size() == 64);

  SUBCASE("permutation covers every block offset exactly once") {
    std::set<std::pair<int, int>> seen;
    for (const Point& p : pd.permutation) {
      CHECK(p.row >= 0);
      CHECK(p.row < 8);
      CHECK(p.col >= 0);
      CHECK(p.col < 8);
      seen.insert({p.row, p.col});
    }
    CHECK(seen.size() == 64);
  }
  SUBCASE("same seed reproduces, different seed differs") {
    CHECK(gen_pattern_dict(8, 4096, 42).permutation == pd.permutation);
    CHECK(gen_pattern_dict(8, 4096, 43).permutation != pd.permutation);
  }
  SUBCASE("entries are nested prefixes") {
    const auto small = pattern_for_block(pd, 5, 0, 0, 100, 100);
    const auto large = pattern_for_block(pd, 9, 0, 0, 100, 100);
    REQUIRE(small.size() == 5);
    REQUIRE(large.size() == 9);
    for (std::size_t i = 0; i < small.size(); ++i) CHECK(small[i] == large[i]);
  }
}

TEST_CASE("pattern_for_block places, clips and validates") {
  const PatternDictionary pd = gen_pattern_dict(4, 17, 7);

  SUBCASE("label 0 is the empty pattern") {
    CHECK(pattern_for_block(pd, 0, 2, 3, 100, 100).empty());
  }
  SUBCASE("labels above the offsets count saturate at bDim^2 points") {
    CHECK(pattern_for_block(pd, 16, 0, 0, 100, 100).size() == 16);
  }
  SUBCASE("points are translated into the block") {
    for (const Point& p : pattern_for_block(pd, 10, 2, 3, 100, 100)) {
      CHECK(p.row >= 8);
      CHECK(p.row < 12);
      CHECK(p.col >= 12);
      CHECK(p.col < 16);
    }
  }
  SUBCASE("points past the image border are dropped") {
    // block (1,1) spans rows/cols 4..7 but the image ends at 6x6
    const auto pts = pattern_for_block(pd, 16, 1, 1, 6, 6);
    CHECK(pts.size() == 4);  // only the 2x2 corner survives
    for (const Point& p : pts) {
      CHECK(p.row < 6);
      CHECK(p.col < 6);
    }
  }
  SUBCASE("label outside the dictionary throws") {
    CHECK_THROWS_AS(pattern_for_block(pd, 17, 0, 0, 100, 100),
                    std::invalid_argument);
  }
}

TEST_CASE("kmeans of a single color fills the palette with it") {
  WeightedColorSet colors;
  colors[{10, 200, 30}] = 5;
  const ColorDictionary cd = kmeans_palette(colors, 2, 50, 1);
  REQUIRE(cd.entries.size() == 4);
  for (const Rgb& e : cd.entries) CHECK(e == Rgb{10, 200, 30});
}

TEST_CASE("kmeans separates two colors regardless of weight skew") {
  WeightedColorSet colors;
  colors[{10, 10, 10}] = 100;
  colors[{200, 200, 200}] = 1;
  const ColorDictionary cd = kmeans_palette(colors, 1, 50, 3);
  REQUIRE(cd.entries.size() == 2);
  const std::set<Rgb> got(cd.entries.begin(), cd.entries.end());
  CHECK(got == std::set<Rgb>{{10, 10, 10}, {200, 200, 200}});
}

TEST_CASE("kmeans recovers well-separated clusters near-optimally") {
  // Eight tight clusters at the corners of an inset RGB cube.
  const std::array<Rgb, 8> centers = {{{30, 30, 30},
                                       {30, 30, 220},
                                       {30, 220, 30},
                                       {30, 220, 220},
                                       {220, 30, 30},
                                       {220, 30, 220},
                                       {220, 220, 30},
                                       {220, 220, 220}}};
  SplitMix64 rng(1234);
  WeightedColorSet colors;
  std::array<std::array<double, 4>, 8> accum{};  // wsum, wr, wg, wb
  for (int i = 0; i < 30; ++i) {
    const std::size_t k = i % 8;
    Rgb c;
    for (int ch = 0; ch < 3; ++ch) {
      const int jitter = static_cast<int>(rng.next_below(7)) - 3;
      c[static_cast<std::size_t>(ch)] = static_cast<std::uint8_t>(
          static_cast<int>(centers[k][static_cast<std::size_t>(ch)]) + jitter);
    }
    const std::uint64_t w = 1 + rng.next_below(5);
    colors[c] += w;
  }
  // Ground truth: the weighted mean of each cluster, rounded like the
  // implementation rounds its centroids.
  for (const auto& [rgb, w] : colors) {
    std::size_t k = 0;
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (std::size_t j = 0; j < 8; ++j) {
      std::int64_t d = 0;
      for (int ch = 0; ch < 3; ++ch) {
        const std::int64_t diff =
            static_cast<std::int64_t>(rgb[static_cast<std::size_t>(ch)]) -
            static_cast<std::int64_t>(centers[j][static_cast<std::size_t>(ch)]);
        d += diff * diff;
      }
      if (d < best) {
        best = d;
        k = j;
      }
    }
    accum[k][0] += static_cast<double>(w);
    for (int ch = 0; ch < 3; ++ch)
      accum[k][static_cast<std::size_t>(ch) + 1] +=
          static_cast<double>(w) * rgb[static_cast<std::size_t>(ch)];
  }
  ColorDictionary truth;
  truth.cb = 3;
  for (const auto& a : accum) {
    REQUIRE(a[0] > 0.0);
    truth.entries.push_back({static_cast<std::uint8_t>(std::llround(a[1] / a[0])),
                             static_cast<std::uint8_t>(std::llround(a[2] / a[0])),
                             static_cast<std::uint8_t>(std::llround(a[3] / a[0]))});
  }
  const double sseTruth = weighted_sse(colors, truth);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ColorDictionary cd = kmeans_palette(colors, 3, 100, seed);
    CHECK(weighted_sse(colors, cd) <= sseTruth * 1.01 + 1e-9);
  }
}

TEST_CASE("kmeans SSE trace is non-increasing") {
  SplitMix64 rng(8);
  WeightedColorSet colors;
  for (int i = 0; i < 120; ++i)
    colors[{static_cast<std::uint8_t>(rng.next_below(256)),
            static_cast<std::uint8_t>(rng.next_below(256)),
            static_cast<std::uint8_t>(rng.next_below(256))}] += 1 + rng.next_below(9);
  std::vector<double> trace;
  kmeans_palette(colors, 3, 40, 5, &trace);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i] <= trace[i - 1] + 1e-9);
}

TEST_CASE("kmeans is deterministic and validates inputs") {
  SplitMix64 rng(4);
  WeightedColorSet colors;
  for (int i = 0; i < 40; ++i)
    colors[{static_cast<std::uint8_t>(rng.next_below(256)),
            static_cast<std::uint8_t>(rng.next_below(256)),
            static_cast<std::uint8_t>(rng.next_below(256))}] += 1;
  CHECK(kmeans_palette(colors, 4, 30, 11).entries ==
        kmeans_palette(colors, 4, 30, 11).entries);
  CHECK_THROWS_AS(kmeans_palette({}, 4, 30, 11), std::invalid_argument);
  CHECK_THROWS_AS(kmeans_palette(colors, 0, 30, 11), std::invalid_argument);
}

TEST_CASE("quantize_color picks the nearest entry, ties to the first") {
  ColorDictionary cd;
  cd.cb = 2;
  cd.entries = {{0, 0, 0}, {100, 100, 100}, {100, 100, 100}, {255, 255, 255}};

  CHECK(quantize_color(cd, {0, 0, 0}) == 0);
  CHECK(quantize_color(cd, {100, 100, 100}) == 1);  // exact tie -> first
  CHECK(quantize_color(cd, {255, 255, 254}) == 3);
  CHECK(quantize_color(cd, {50, 50, 50}) == 0);  // equidistant 0 vs 1 -> 0

  SUBCASE("agrees with a linear-scan oracle on random colors") {
    SplitMix64 rng(17);
    ColorDictionary pal;
    pal.cb = 4;
    for (int i = 0; i < 16; ++i)
      pal.entries.push_back({static_cast<std::uint8_t>(rng.next_below(256)),
                             static_cast<std::uint8_t>(rng.next_below(256)),
                             static_cast<std::uint8_t>(rng.next_below(256))});
    for (int i = 0; i < 1000; ++i) {
      const Rgb q = {static_cast<std::uint8_t>(rng.next_below(256)),
                     static_cast<std::uint8_t>(rng.next_below(256)),
                     static_cast<std::uint8_t>(rng.next_below(256))};
      std::uint32_t best = 0;
      std::int64_t bd = std::numeric_limits<std::int64_t>::max();
      for (std::size_t j = 0; j < pal.entries.size(); ++j) {
        std::int64_t d = 0;
        for (int ch = 0; ch < 3; ++ch) {
          const std::int64_t diff =
              static_cast<std::int64_t>(pal.entries[j][static_cast<std::size_t>(ch)]) -
              static_cast<std::int64_t>(q[static_cast<std::size_t>(ch)]);
          d += diff * diff;
        }
        if (d < bd) {
          bd = d;
          best = static_cast<std::uint32_t>(j);
        }
      }
      CHECK(quantize_color(pal, q) == best);
    }
  }
}

TEST_CASE("avg_triangle_color rounds half up per channel") {
  Image img = Image::filled(2, 2, 0, 0, 0);
  for (int ch = 0; ch < 3; ++ch) img.at(0, 1)(ch) = 255;

  SUBCASE("uniform region") {
    Image red = Image::filled(2, 2, 200, 10, 10);
    const auto avg = avg_triangle_color(red, {0, 1, 2});
    REQUIRE(avg.has_value());
    CHECK(*avg == Rgb{200, 10, 10});
  }
  SUBCASE("0 and 255 average to 128") {
    const auto avg = avg_triangle_color(img, {0, 1});
    REQUIRE(avg.has_value());
    CHECK(*avg == Rgb{128, 128, 128});
  }
  SUBCASE("empty pixel list yields nothing") {
    CHECK(avg_triangle_color(img, {}) == std::nullopt);
  }
}
