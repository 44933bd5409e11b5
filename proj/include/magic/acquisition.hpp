#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "magic/dictionaries.hpp"
#include "magic/predictor.hpp"

namespace magic {

/// Knobs of the knowledge acquisition phase. Defaults follow the reference
/// configuration: 64-pixel blocks, 10 split rounds, threshold 5, 8 color
/// bits, grid = ceil((rows+cols)/20), 4096-entry pattern dictionary.
struct AcquisitionParams {
  Index bDim = 64;
  int iterLimit = 10;
  Index pw = 8;
  double th = 5.0;
  int cb = 8;
  int gridDivisor = 20;
  std::uint32_t patternDictSize = 4096;
  std::uint64_t patternSeed = 0x6d61676963u;  // arbitrary fixed defaults,
  std::uint64_t kmeansSeed = 0x636f6c6f72u;   // overridable from the CLI
  std::uint64_t trainSeed = 0x747261696eu;
  int kmeansIters = 100;
  int epochs = 60;
  double lr = 0.01;
};

/// Everything the codec endpoints need: the pattern dictionary (regenerable
/// from seed), the color palette, and the trained predictor (encoder-only).
struct KnowledgePackage {
  static constexpr std::uint8_t kVersion = 1;

  PatternDictionary patternDict;
  ColorDictionary colorDict;
  MlpF model;
  Index bDim = 0;
  int cb = 0;
};

/// acquire() output: the package plus the training set and loss trace, which
/// the package itself does not retain.
struct AcquisitionResult {
  KnowledgePackage package;
  TrainingSet training;
  TrainReport trainReport;
};

/// Knowledge acquisition over a sample corpus. Per image: spray grid points,
/// add edge points, refine by triangle splitting for iterLimit rounds, prune
/// to one point per pw-window, then harvest triangle colors and per-block
/// (features, point-count label) pairs. Afterwards the color palette is
/// clustered and the predictor trained. Deterministic given paths, params
/// and seeds. Throws on unreadable images or an empty corpus.
AcquisitionResult acquire(const std::vector<std::filesystem::path>& imgPaths,
                          const AcquisitionParams& p);

/// Package container format, all integers little-endian:
///   "MGIC" | version u8 | bDim u16 | cb u8 | patternDictSize u32 |
///   patternSeed u64 | colorDict entries (3 bytes each, 2^cb of them) |
///   layerCount u32 | layer sizes u32 each | per layer: weights row-major
///   f32, then biases f32.
std::vector<std::uint8_t> package_bytes(const KnowledgePackage& kp);
KnowledgePackage package_from_bytes(std::span<const std::uint8_t> bytes);

void save_package(const KnowledgePackage& kp, const std::filesystem::path& path);
KnowledgePackage load_package(const std::filesystem::path& path);

}  // namespace magic
