#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "magic/analysis.hpp"
#include "magic/rng.hpp"

using namespace magic;

namespace {

/// Independent quantile oracle: linear interpolation at rank p*(n-1).
double quantile_oracle(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  if (v.size() == 1) return v[0];
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

TEST_CASE("dataset_stats on hand-checked samples") {
  SUBCASE("constant sample") {
    const DatasetStats s = dataset_stats({1.0, 1.0, 1.0});
    CHECK(s.count == 3);
    CHECK(s.mean == doctest::Approx(1.0));
    CHECK(s.stddev == doctest::Approx(0.0));
    CHECK(s.min == 1.0);
    CHECK(s.q1 == 1.0);
    CHECK(s.median == 1.0);
    CHECK(s.q3 == 1.0);
    CHECK(s.max == 1.0);
  }
  SUBCASE("four points interpolate between order statistics") {
    const DatasetStats s = dataset_stats({4.0, 2.0, 3.0, 1.0});
    CHECK(s.count == 4);
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.stddev == doctest::Approx(std::sqrt(1.25)));
    CHECK(s.min == 1.0);
    CHECK(s.q1 == doctest::Approx(1.75));
    CHECK(s.median == doctest::Approx(2.5));
    CHECK(s.q3 == doctest::Approx(3.25));
    CHECK(s.max == 4.0);
  }
  SUBCASE("singleton") {
    const DatasetStats s = dataset_stats({7.0});
    CHECK(s.count == 1);
    CHECK(s.mean == 7.0);
    CHECK(s.stddev == 0.0);
    CHECK(s.median == 7.0);
  }
  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS(dataset_stats({}), std::invalid_argument);
  }
}

TEST_CASE("dataset_stats agrees with independent oracles on random data") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 1 + rng.next_below(200);
    std::vector<double> v(n);
    for (double& x : v) x = rng.next_unit() * 10.0;

    const DatasetStats s = dataset_stats(v);
    long double sum = 0;
    for (const double x : v) sum += x;
    const double mean = static_cast<double>(sum / static_cast<long double>(n));
    long double var = 0;
    for (const double x : v) var += (x - mean) * (x - mean);

    CHECK(s.count == n);
    CHECK(s.mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(s.stddev ==
          doctest::Approx(std::sqrt(static_cast<double>(var / static_cast<long double>(n))))
              .epsilon(1e-9));
    CHECK(s.min == *std::min_element(v.begin(), v.end()));
    CHECK(s.max == *std::max_element(v.begin(), v.end()));
    CHECK(s.q1 == doctest::Approx(quantile_oracle(v, 0.25)).epsilon(1e-12));
    CHECK(s.median == doctest::Approx(quantile_oracle(v, 0.5)).epsilon(1e-12));
    CHECK(s.q3 == doctest::Approx(quantile_oracle(v, 0.75)).epsilon(1e-12));
  }
}

TEST_CASE("ct_cutoff computes million-cycles-per-byte") {
  SUBCASE("reference point") {
    const double c = ct_cutoff({2.0, 1.0, 1000.0, 5000.0, 3.7e9});
    CHECK(c == doctest::Approx(0.925).epsilon(1e-9));
  }
  SUBCASE("a faster encoder yields a negative cutoff") {
    CHECK(ct_cutoff({1.0, 2.0, 1000.0, 5000.0, 3.7e9}) ==
          doctest::Approx(-0.925).epsilon(1e-9));
  }
  SUBCASE("linear in the clock frequency") {
    const CtInputs base{2.0, 1.0, 1000.0, 5000.0, 1.0e9};
    CtInputs twice = base;
    twice.f = 2.0e9;
    CHECK(ct_cutoff(twice) == doctest::Approx(2.0 * ct_cutoff(base)));
  }
  SUBCASE("no cutoff when this codec is not smaller") {
    CHECK_THROWS_AS(ct_cutoff({2.0, 1.0, 5000.0, 1000.0, 3.7e9}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ct_cutoff({2.0, 1.0, 1000.0, 1000.0, 3.7e9}),
                    std::invalid_argument);
  }
  SUBCASE("non-positive inputs are rejected") {
    CHECK_THROWS_AS(ct_cutoff({0.0, 1.0, 1000.0, 5000.0, 3.7e9}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ct_cutoff({2.0, -1.0, 1000.0, 5000.0, 3.7e9}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ct_cutoff({2.0, 1.0, 1000.0, 5000.0, 0.0}),
                    std::invalid_argument);
  }
}

TEST_CASE("stats_csv emits a parseable table") {
  const std::vector<FileBpp> rows = {{"a.ppm", 114, 0.11}, {"b.png", 2048, 0.25}};
  const std::string csv = stats_csv(rows);

  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "file,bytes,bpp");

  std::size_t i = 0;
  while (std::getline(in, line)) {
    REQUIRE(i < rows.size());
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    REQUIRE(c1 != std::string::npos);
    REQUIRE(c2 != std::string::npos);
    CHECK(line.substr(0, c1) == rows[i].file);
    CHECK(std::stoull(line.substr(c1 + 1, c2 - c1 - 1)) == rows[i].bytes);
    CHECK(std::stod(line.substr(c2 + 1)) == doctest::Approx(rows[i].bpp));
    ++i;
  }
  CHECK(i == rows.size());
}

TEST_CASE("stats_json round-trips every summary field") {
  const DatasetStats s = dataset_stats({0.5, 1.5, 2.0, 4.0, 8.0});
  const auto j = nlohmann::json::parse(stats_json(s));
  CHECK(j.at("count").get<std::size_t>() == s.count);
  CHECK(j.at("mean").get<double>() == doctest::Approx(s.mean).epsilon(1e-15));
  CHECK(j.at("stddev").get<double>() == doctest::Approx(s.stddev).epsilon(1e-15));
  CHECK(j.at("min").get<double>() == s.min);
  CHECK(j.at("q1").get<double>() == doctest::Approx(s.q1).epsilon(1e-15));
  CHECK(j.at("median").get<double>() == doctest::Approx(s.median).epsilon(1e-15));
  CHECK(j.at("q3").get<double>() == doctest::Approx(s.q3).epsilon(1e-15));
  CHECK(j.at("max").get<double>() == s.max);
}
