#include "magic/acquisition.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "magic/errors.hpp"
#include "magic/features.hpp"
#include "magic/serial.hpp"

namespace magic {
namespace {

Index ceil_div(Index a, Index b) { return (a + b - 1) / b; }

void validate_params(const AcquisitionParams& p) {
  if (p.bDim < 1 || p.iterLimit < 0 || p.pw < 1 || p.cb < 1 || p.cb > 24 ||
      p.gridDivisor < 1 || p.patternDictSize < 2 || p.kmeansIters < 1 ||
      p.epochs < 1 || !(p.lr > 0.0) || !(p.th >= 0.0))
    throw std::invalid_argument("acquire: invalid parameters");
}

}  // namespace

AcquisitionResult acquire(const std::vector<std::filesystem::path>& imgPaths,
                          const AcquisitionParams& p) {
  validate_params(p);
  if (imgPaths.empty()) throw std::invalid_argument("acquire: empty corpus");

  WeightedColorSet colorFreq;
  std::vector<Eigen::VectorXd> featureRows;
  std::vector<std::uint32_t> labels;

  for (const std::filesystem::path& path : imgPaths) {
    const Image img = load_image(path);
    const GrayImage gray = to_gray(img);
    const Index rows = img.rows, cols = img.cols;
    const Index grid = ceil_div(rows + cols, p.gridDivisor);

    // Seed the point set with the uniform spray plus detected edges, then
    // chase detail: each round splits every triangle whose intensity spread
    // exceeds the threshold. A round that adds nothing ends the loop early
    // (it would repeat verbatim).
    const PointSet gridPts = grid_spray(rows, cols, grid);
    PointSet pointArr = gridPts.merged(edge_points(gray));
    for (int it = 0; it < p.iterLimit; ++it) {
      const Triangulation tri = delaunay(pointArr);
      std::vector<Point> added;
      for (const Triangle& t : tri.triangles)
        if (const auto split = split_triangle(t, tri.points, gray, p.th))
          added.push_back(*split);
      const PointSet next = pointArr.merged(PointSet::from_points(std::move(added)));
      if (next.size() == pointArr.size()) break;
      pointArr = next;
    }
    pointArr = prune_points(pointArr, p.pw, rows, cols);

    const Triangulation tri = delaunay(pointArr);
    for (const Triangle& t : tri.triangles) {
      const auto pix = triangle_pixels(t, tri.points, rows, cols);
      if (const auto avg = avg_triangle_color(img, pix)) ++colorFreq[*avg];
    }

    // Per-block training pairs: entropy features against the number of
    // surviving detail points in the block, capped at the last dictionary
    // entry. Grid-spray points are excluded: the decoder regenerates the
    // spray on its own, so labels must describe only the points beyond it.
    const EntropyMap em = local_entropy(gray, kEntropyRadius);
    const Index blockRows = ceil_div(rows, p.bDim);
    const Index blockCols = ceil_div(cols, p.bDim);
    std::vector<std::uint32_t> counts(
        static_cast<std::size_t>(blockRows * blockCols), 0);
    const std::vector<Point>& gridVec = gridPts.points();
    for (const Point& pt : pointArr.points()) {
      if (std::binary_search(gridVec.begin(), gridVec.end(), pt)) continue;
      const Index br = pt.row / p.bDim, bc = pt.col / p.bDim;
      ++counts[static_cast<std::size_t>(br * blockCols + bc)];
    }
    for (Index br = 0; br < blockRows; ++br) {
      for (Index bc = 0; bc < blockCols; ++bc) {
        featureRows.push_back(block_features(em, br, bc, p.bDim));
        labels.push_back(std::min(counts[static_cast<std::size_t>(br * blockCols + bc)],
                                  p.patternDictSize - 1));
      }
    }
  }
  if (featureRows.empty()) throw std::invalid_argument("acquire: no valid blocks");

  AcquisitionResult res;
  res.training.inputs.resize(static_cast<Index>(featureRows.size()), p.bDim * p.bDim);
  for (std::size_t i = 0; i < featureRows.size(); ++i)
    res.training.inputs.row(static_cast<Index>(i)) = featureRows[i].transpose();
  res.training.targets = labels;
  res.training.dict_size = p.patternDictSize;

  KnowledgePackage& kp = res.package;
  kp.bDim = p.bDim;
  kp.cb = p.cb;
  kp.patternDict = gen_pattern_dict(p.bDim, p.patternDictSize, p.patternSeed);
  kp.colorDict = kmeans_palette(colorFreq, p.cb, p.kmeansIters, p.kmeansSeed);
  const MlpF init = make_mlp<float>({p.bDim * p.bDim, 128, 64, 1}, p.trainSeed);
  kp.model = train(init, res.training, p.epochs, p.lr, p.trainSeed + 1,
                   &res.trainReport);
  return res;
}

std::vector<std::uint8_t> package_bytes(const KnowledgePackage& kp) {
  ByteWriter w;
  w.u8('M');
  w.u8('G');
  w.u8('I');
  w.u8('C');
  w.u8(KnowledgePackage::kVersion);
  w.u16(static_cast<std::uint16_t>(kp.bDim));
  w.u8(static_cast<std::uint8_t>(kp.cb));
  w.u32(kp.patternDict.size);
  w.u64(kp.patternDict.seed);
  for (const Rgb& c : kp.colorDict.entries)
    for (const std::uint8_t ch : c) w.u8(ch);
  const std::vector<Index> sizes = kp.model.sizes();
  w.u32(static_cast<std::uint32_t>(sizes.size()));
  for (const Index s : sizes) w.u32(static_cast<std::uint32_t>(s));
  for (std::size_t l = 0; l < kp.model.W.size(); ++l) {
    const auto& W = kp.model.W[l];
    for (Index r = 0; r < W.rows(); ++r)
      for (Index c = 0; c < W.cols(); ++c) w.f32(W(r, c));
    for (Index r = 0; r < kp.model.b[l].size(); ++r) w.f32(kp.model.b[l](r));
  }
  return w.take();
}

KnowledgePackage package_from_bytes(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.u8() != 'M' || r.u8() != 'G' || r.u8() != 'I' || r.u8() != 'C')
    throw FormatError("package: bad magic bytes");
  const std::uint8_t version = r.u8();
  if (version != KnowledgePackage::kVersion)
    throw FormatError("package: unsupported version");

  KnowledgePackage kp;
  kp.bDim = r.u16();
  kp.cb = r.u8();
  const std::uint32_t dictSize = r.u32();
  const std::uint64_t patternSeed = r.u64();
  if (kp.bDim < 1 || kp.cb < 1 || kp.cb > 24 || dictSize < 2)
    throw FormatError("package: invalid parameters");
  kp.patternDict = gen_pattern_dict(kp.bDim, dictSize, patternSeed);

  kp.colorDict.cb = kp.cb;
  const std::size_t entries = std::size_t{1} << kp.cb;
  kp.colorDict.entries.resize(entries);
  for (Rgb& c : kp.colorDict.entries)
    for (std::uint8_t& ch : c) ch = r.u8();

  const std::uint32_t layerCount = r.u32();
  if (layerCount < 2 || layerCount > 16) throw FormatError("package: bad layer count");
  std::vector<Index> sizes(layerCount);
  for (Index& s : sizes) {
    s = static_cast<Index>(r.u32());
    if (s < 1 || s > (1 << 24)) throw FormatError("package: bad layer size");
  }
  if (sizes.front() != kp.bDim * kp.bDim || sizes.back() != 1)
    throw FormatError("package: model shape inconsistent with bDim");
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    MlpF::Matrix W(sizes[l + 1], sizes[l]);
    for (Index rr = 0; rr < W.rows(); ++rr)
      for (Index cc = 0; cc < W.cols(); ++cc) W(rr, cc) = r.f32();
    MlpF::Vector b(sizes[l + 1]);
    for (Index rr = 0; rr < b.size(); ++rr) b(rr) = r.f32();
    kp.model.W.push_back(std::move(W));
    kp.model.b.push_back(std::move(b));
  }
  if (!r.done()) throw FormatError("package: trailing bytes");
  return kp;
}

void save_package(const KnowledgePackage& kp, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = package_bytes(kp);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

KnowledgePackage load_package(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                  std::istreambuf_iterator<char>()};
  return package_from_bytes(bytes);
}

}  // namespace magic
