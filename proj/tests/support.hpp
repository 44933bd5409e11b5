// Shared test helpers: deterministic synthetic images, throwaway packages,
// and a scoped temp directory. Everything seeded goes through SplitMix64 so
// test inputs are identical on every platform.
#pragma once

#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "magic/acquisition.hpp"
#include "magic/dictionaries.hpp"
#include "magic/image.hpp"
#include "magic/rng.hpp"

namespace testsupport {

inline magic::Image noise_image(magic::Index rows, magic::Index cols,
                                std::uint64_t seed) {
  magic::Image img = magic::Image::filled(rows, cols, 0, 0, 0);
  magic::SplitMix64 rng(seed);
  for (magic::Index px = 0; px < rows * cols; ++px) {
    const std::uint64_t v = rng.next();
    img.pixels(px, 0) = static_cast<std::uint8_t>(v);
    img.pixels(px, 1) = static_cast<std::uint8_t>(v >> 8);
    img.pixels(px, 2) = static_cast<std::uint8_t>(v >> 16);
  }
  return img;
}

inline magic::Image gradient_image(magic::Index rows, magic::Index cols) {
  magic::Image img = magic::Image::filled(rows, cols, 0, 0, 0);
  for (magic::Index r = 0; r < rows; ++r)
    for (magic::Index c = 0; c < cols; ++c) {
      img.at(r, c)(0) = static_cast<std::uint8_t>((r * 255) / (rows - 1));
      img.at(r, c)(1) = static_cast<std::uint8_t>((c * 255) / (cols - 1));
      img.at(r, c)(2) = static_cast<std::uint8_t>(((r + c) * 255) / (rows + cols - 2));
    }
  return img;
}

/// Mosaic of random-colored cells with soft per-cell gradients and sparse
/// speckle: plenty of edges and flat runs, like a real photographic scene.
inline magic::Image textured_image(magic::Index rows, magic::Index cols,
                                   std::uint64_t seed, magic::Index cell = 32) {
  magic::Image img = magic::Image::filled(rows, cols, 0, 0, 0);
  magic::SplitMix64 rng(seed);
  const magic::Index cellRows = (rows + cell - 1) / cell;
  const magic::Index cellCols = (cols + cell - 1) / cell;
  std::vector<std::array<std::uint8_t, 3>> base(
      static_cast<std::size_t>(cellRows * cellCols));
  for (auto& b : base) {
    const std::uint64_t v = rng.next();
    b = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
         static_cast<std::uint8_t>(v >> 16)};
  }
  for (magic::Index r = 0; r < rows; ++r) {
    for (magic::Index c = 0; c < cols; ++c) {
      const auto& b =
          base[static_cast<std::size_t>((r / cell) * cellCols + c / cell)];
      const int shade = static_cast<int>((r % cell) + (c % cell)) - static_cast<int>(cell);
      for (int ch = 0; ch < 3; ++ch) {
        const int v = static_cast<int>(b[static_cast<std::size_t>(ch)]) + shade / 2;
        img.at(r, c)(ch) = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
    }
  }
  // Sparse speckle: one bright dot per ~256 pixels.
  const magic::Index dots = rows * cols / 256;
  for (magic::Index i = 0; i < dots; ++i) {
    const auto r = static_cast<magic::Index>(rng.next_below(static_cast<std::uint64_t>(rows)));
    const auto c = static_cast<magic::Index>(rng.next_below(static_cast<std::uint64_t>(cols)));
    img.at(r, c)(0) = 255;
    img.at(r, c)(1) = 255;
    img.at(r, c)(2) = 0;
  }
  return img;
}

/// Synthetic knowledge package: seeded pattern dictionary, a fixed formulaic
/// palette, and a single-layer model with zero weights whose bias alone sets
/// the (raw) predicted label. bias 0 predicts label 0; bias 1 predicts the
/// top label dictSize-1 before division by d.
inline magic::KnowledgePackage test_package(magic::Index bDim, int cb,
                                            float bias = 0.0f,
                                            std::uint32_t dictSize = 4096,
                                            std::uint64_t seed = 99) {
  magic::KnowledgePackage kp;
  kp.bDim = bDim;
  kp.cb = cb;
  kp.patternDict = magic::gen_pattern_dict(bDim, dictSize, seed);
  kp.colorDict.cb = cb;
  const std::size_t k = std::size_t{1} << cb;
  kp.colorDict.entries.reserve(k);
  for (std::size_t i = 0; i < k; ++i)
    kp.colorDict.entries.push_back({static_cast<std::uint8_t>((i * 37) & 255),
                                    static_cast<std::uint8_t>((i * 59) & 255),
                                    static_cast<std::uint8_t>((i * 83) & 255)});
  kp.model.W.push_back(magic::MlpF::Matrix::Zero(1, bDim * bDim));
  kp.model.b.push_back(magic::MlpF::Vector::Constant(1, bias));
  return kp;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    const unsigned id = counter.fetch_add(1);
    path_ = std::filesystem::temp_directory_path() /
            ("magic_test_" + std::to_string(::getpid()) + "_" + std::to_string(id));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testsupport
