#include "magic/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace magic {
namespace {

/// Linear-interpolation quantile over sorted values (the common "R-7" rule).
double quantile(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

DatasetStats dataset_stats(const std::vector<double>& bppValues) {
  if (bppValues.empty()) throw std::invalid_argument("dataset_stats: empty list");
  std::vector<double> sorted = bppValues;
  std::sort(sorted.begin(), sorted.end());

  DatasetStats s;
  s.count = sorted.size();
  double sum = 0, sumsq = 0;
  for (const double v : sorted) {
    sum += v;
    sumsq += v * v;
  }
  const double n = static_cast<double>(s.count);
  s.mean = sum / n;
  s.stddev = std::sqrt(std::max(0.0, sumsq / n - s.mean * s.mean));
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile(sorted, 0.25);
  s.median = quantile(sorted, 0.5);
  s.q3 = quantile(sorted, 0.75);
  return s;
}

double ct_cutoff(const CtInputs& c) {
  if (!(c.e1 > 0) || !(c.e2 > 0) || !(c.i1 > 0) || !(c.i2 > 0) || !(c.f > 0))
    throw std::invalid_argument("ct_cutoff: all inputs must be positive");
  if (c.i2 <= c.i1)
    throw std::invalid_argument(
        "ct_cutoff: no cutoff exists (this codec is not smaller: I2 <= I1)");
  return ((c.e1 - c.e2) * c.f) / ((c.i2 - c.i1) * 1e6);
}

std::string stats_csv(const std::vector<FileBpp>& rows) {
  std::ostringstream out;
  out << "file,bytes,bpp\n";
  out.precision(17);
  for (const FileBpp& r : rows) out << r.file << ',' << r.bytes << ',' << r.bpp << '\n';
  return out.str();
}

std::string stats_json(const DatasetStats& s) {
  nlohmann::json j{{"count", s.count}, {"mean", s.mean}, {"stddev", s.stddev},
                   {"min", s.min},     {"q1", s.q1},     {"median", s.median},
                   {"q3", s.q3},       {"max", s.max}};
  return j.dump(2);
}

}  // namespace magic
