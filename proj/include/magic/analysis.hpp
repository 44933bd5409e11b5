#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace magic {

/// Summary of a BPP (bits per pixel) sample. Quartiles use linear
/// interpolation between order statistics; the standard deviation is the
/// population form.
struct DatasetStats {
  std::size_t count = 0;
  double mean = 0, stddev = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

DatasetStats dataset_stats(const std::vector<double>& bppValues);

/// Inputs of the computation-versus-transmission energy cutoff: mean encode
/// seconds and mean encoded bytes for this codec (E1, I1) and a competitor
/// (E2, I2), plus the CPU clock in Hz.
struct CtInputs {
  double e1 = 0, e2 = 0;
  double i1 = 0, i2 = 0;
  double f = 0;
};

/// Cutoff in million clock cycles per transmitted byte:
/// ((E1 - E2) * f) / ((I2 - I1) * 1e6). Negative means this codec always
/// wins. Throws std::invalid_argument when I2 <= I1 (this codec is not
/// smaller, so no cutoff exists) or any input is non-positive.
double ct_cutoff(const CtInputs& c);

/// One measured file for CSV reporting.
struct FileBpp {
  std::string file;
  std::uint64_t bytes = 0;
  double bpp = 0;
};

/// CSV with header "file,bytes,bpp", one row per entry.
std::string stats_csv(const std::vector<FileBpp>& rows);

/// JSON object with the DatasetStats fields.
std::string stats_json(const DatasetStats& s);

}  // namespace magic
