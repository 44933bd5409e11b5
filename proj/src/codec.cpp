#include "magic/codec.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "magic/bitio.hpp"
#include "magic/errors.hpp"
#include "magic/features.hpp"

namespace magic {
namespace {

Index ceil_div(Index a, Index b) { return (a + b - 1) / b; }

Index default_grid(Index rows, Index cols) { return ceil_div(rows + cols, 20); }

/// Point set both endpoints derive from the labels: the uniform grid plus
/// each block's spray pattern, row-major block order.
PointSet points_from_labels(const std::vector<std::uint32_t>& labels,
                            const PatternDictionary& pd, Index grid, Index rows,
                            Index cols) {
  PointSet pts = grid_spray(rows, cols, grid);
  const Index blockCols = ceil_div(cols, pd.bDim);
  std::vector<Point> extra;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Index br = static_cast<Index>(i) / blockCols;
    const Index bc = static_cast<Index>(i) % blockCols;
    const auto p = pattern_for_block(pd, labels[i], br, bc, rows, cols);
    extra.insert(extra.end(), p.begin(), p.end());
  }
  return pts.merged(PointSet::from_points(std::move(extra)));
}

/// Last triangle (in canonical order) claiming each pixel. -1 where no
/// triangle does (cannot happen when the four corners are present).
std::vector<std::int32_t> owner_map(const Triangulation& tess, Index rows,
                                    Index cols) {
  std::vector<std::int32_t> owner(static_cast<std::size_t>(rows * cols), -1);
  for (std::size_t t = 0; t < tess.triangles.size(); ++t)
    for (const std::int64_t px :
         triangle_pixels(tess.triangles[t], tess.points, rows, cols))
      owner[static_cast<std::size_t>(px)] = static_cast<std::int32_t>(t);
  return owner;
}

EncodedImage encode_core(const Image& img, const KnowledgePackage& kp,
                         std::vector<std::uint32_t> labels, Index grid) {
  const Index rows = img.rows, cols = img.cols;
  EncodedImage enc;
  enc.rows = static_cast<std::uint16_t>(rows);
  enc.cols = static_cast<std::uint16_t>(cols);
  enc.grid = static_cast<std::uint16_t>(grid);
  enc.bDim = static_cast<std::uint16_t>(kp.bDim);
  enc.labelBits = label_bits(kp.patternDict.size);
  enc.cb = static_cast<std::uint8_t>(kp.cb);
  enc.labels = std::move(labels);

  enc.tess = delaunay(
      points_from_labels(enc.labels, kp.patternDict, grid, rows, cols));

  // Average each triangle over the pixels it will actually show after
  // decoding (owner pixels). This makes decode(encode(...)) a fixed point:
  // owned pixels of a decoded image hold exactly one palette color, which
  // re-quantizes to an entry with the same value. Triangles that own no
  // pixel are invisible and emit index 0.
  const std::vector<std::int32_t> owner = owner_map(enc.tess, rows, cols);
  const std::size_t T = enc.tess.triangles.size();
  std::vector<std::array<std::uint64_t, 3>> sums(T, {0, 0, 0});
  std::vector<std::uint64_t> counts(T, 0);
  for (Index px = 0; px < rows * cols; ++px) {
    const std::int32_t o = owner[static_cast<std::size_t>(px)];
    if (o < 0) continue;
    for (int ch = 0; ch < 3; ++ch)
      sums[static_cast<std::size_t>(o)][static_cast<std::size_t>(ch)] +=
          img.pixels(px, ch);
    ++counts[static_cast<std::size_t>(o)];
  }
  enc.colorIndices.resize(T, 0);
  for (std::size_t t = 0; t < T; ++t) {
    if (counts[t] == 0) continue;  // degenerate: substitutes entry 0
    Rgb avg;
    for (int ch = 0; ch < 3; ++ch)
      avg[static_cast<std::size_t>(ch)] = static_cast<std::uint8_t>(
          (2 * sums[t][static_cast<std::size_t>(ch)] + counts[t]) / (2 * counts[t]));
    enc.colorIndices[t] = quantize_color(kp.colorDict, avg);
  }
  return enc;
}

void validate_image_dims(const Image& img) {
  if (img.rows < 2 || img.cols < 2)
    throw std::invalid_argument("encode: image must be at least 2x2");
  if (img.rows > kMaxImageDim || img.cols > kMaxImageDim)
    throw std::invalid_argument("encode: image exceeds 16-bit dimensions");
}

}  // namespace

std::uint8_t label_bits(std::uint32_t patternDictSize) {
  const int w = std::bit_width(patternDictSize - 1);
  return static_cast<std::uint8_t>(std::max(w, 1));
}

EncodedImage encode(const Image& img, const KnowledgePackage& kp,
                    const EncodeParams& ep) {
  validate_image_dims(img);
  if (ep.d == 0) throw std::invalid_argument("encode: d must be >= 1");
  for (const RoiRect& r : ep.roi)
    if (r.droi == 0 || r.r0 > r.r1 || r.c0 > r.c1)
      throw std::invalid_argument("encode: malformed ROI rectangle");

  const Index rows = img.rows, cols = img.cols;
  const Index grid = ep.grid > 0 ? ep.grid : default_grid(rows, cols);
  const GrayImage gray = to_gray(img);
  const EntropyMap em = local_entropy(gray, kEntropyRadius);

  const Index blockRows = ceil_div(rows, kp.bDim);
  const Index blockCols = ceil_div(cols, kp.bDim);
  std::vector<std::uint32_t> labels;
  labels.reserve(static_cast<std::size_t>(blockRows * blockCols));
  for (Index br = 0; br < blockRows; ++br) {
    for (Index bc = 0; bc < blockCols; ++bc) {
      // Blocks meeting any ROI rectangle use its (smaller) divisor.
      std::uint32_t divisor = ep.d;
      const Index rEnd = std::min(rows, (br + 1) * kp.bDim) - 1;
      const Index cEnd = std::min(cols, (bc + 1) * kp.bDim) - 1;
      for (const RoiRect& r : ep.roi)
        if (r.r0 <= rEnd && r.r1 >= br * kp.bDim && r.c0 <= cEnd &&
            r.c1 >= bc * kp.bDim)
          divisor = std::min(divisor, r.droi);
      const Eigen::VectorXf x = block_features(em, br, bc, kp.bDim).cast<float>();
      labels.push_back(predict_label(kp.model, x, divisor, kp.patternDict.size));
    }
  }
  return encode_core(img, kp, std::move(labels), grid);
}

EncodedImage encode_with_labels(const Image& img, const KnowledgePackage& kp,
                                const std::vector<std::uint32_t>& labels,
                                Index grid) {
  validate_image_dims(img);
  const Index blockCount =
      ceil_div(img.rows, kp.bDim) * ceil_div(img.cols, kp.bDim);
  if (labels.size() != static_cast<std::size_t>(blockCount))
    throw std::invalid_argument("encode_with_labels: label count mismatch");
  for (const std::uint32_t l : labels)
    if (l >= kp.patternDict.size)
      throw std::invalid_argument("encode_with_labels: label out of range");
  return encode_core(img, kp, labels,
                     grid > 0 ? grid : default_grid(img.rows, img.cols));
}

Image decode(const EncodedImage& enc, const KnowledgePackage& kp,
             PlaneX<std::uint8_t>* covered) {
  const Index rows = enc.rows, cols = enc.cols;
  if (rows < 2 || cols < 2) throw FormatError("decode: bad dimensions");
  if (enc.colorIndices.size() != enc.tess.triangles.size() ||
      enc.tess.points.empty())
    throw FormatError("decode: color count mismatch with triangulation");

  Image out = Image::filled(rows, cols, 0, 0, 0);
  if (covered) *covered = PlaneX<std::uint8_t>::Zero(rows, cols);
  for (std::size_t t = 0; t < enc.tess.triangles.size(); ++t) {
    const std::uint32_t ci = enc.colorIndices[t];
    if (ci >= kp.colorDict.entries.size())
      throw FormatError("decode: color index exceeds dictionary");
    const Rgb& rgb = kp.colorDict.entries[ci];
    for (const std::int64_t px :
         triangle_pixels(enc.tess.triangles[t], enc.tess.points, rows, cols)) {
      for (int ch = 0; ch < 3; ++ch) out.pixels(px, ch) = rgb[static_cast<std::size_t>(ch)];
      if (covered) (*covered)(px / cols, px % cols) = 1;
    }
  }
  return out;
}

std::vector<std::uint8_t> to_bytes(const EncodedImage& enc) {
  BitWriter w;
  w.write(enc.rows, 16);
  w.write(enc.cols, 16);
  w.write(enc.grid, 16);
  w.write(enc.bDim, 16);
  for (const std::uint32_t l : enc.labels) w.write(l, enc.labelBits);
  for (const std::uint32_t c : enc.colorIndices) w.write(c, enc.cb);
  std::vector<std::uint8_t> bytes = w.take();
  if (bytes.size() != enc.byte_length())
    throw std::logic_error("to_bytes: size formula violated");
  return bytes;
}

EncodedImage from_bytes(std::span<const std::uint8_t> bytes,
                        const KnowledgePackage& kp) {
  BitReader r(bytes);
  EncodedImage enc;
  enc.rows = static_cast<std::uint16_t>(r.read(16));
  enc.cols = static_cast<std::uint16_t>(r.read(16));
  enc.grid = static_cast<std::uint16_t>(r.read(16));
  enc.bDim = static_cast<std::uint16_t>(r.read(16));
  if (enc.rows < 2 || enc.cols < 2 || enc.grid < 1 || enc.bDim < 1)
    throw FormatError("stream: malformed header");
  if (enc.bDim != kp.bDim)
    std::fprintf(stderr,
                 "warning: stream bDim %u differs from package bDim %lld; "
                 "honoring the stream\n",
                 enc.bDim, static_cast<long long>(kp.bDim));
  enc.labelBits = label_bits(kp.patternDict.size);
  enc.cb = static_cast<std::uint8_t>(kp.cb);

  // The pattern dictionary must be regenerated at the stream's block size
  // for mixed-bDim streams; same seed, so same permutation prefix order.
  const PatternDictionary& pd =
      enc.bDim == kp.patternDict.bDim
          ? kp.patternDict
          : gen_pattern_dict(enc.bDim, kp.patternDict.size, kp.patternDict.seed);

  const Index blockCount =
      ceil_div(enc.rows, enc.bDim) * ceil_div(enc.cols, enc.bDim);
  enc.labels.reserve(static_cast<std::size_t>(blockCount));
  for (Index i = 0; i < blockCount; ++i) {
    const std::uint32_t l = static_cast<std::uint32_t>(r.read(enc.labelBits));
    if (l >= kp.patternDict.size)
      throw FormatError("stream: label exceeds pattern dictionary");
    enc.labels.push_back(l);
  }

  enc.tess =
      delaunay(points_from_labels(enc.labels, pd, enc.grid, enc.rows, enc.cols));
  enc.colorIndices.reserve(enc.tess.triangles.size());
  for (std::size_t t = 0; t < enc.tess.triangles.size(); ++t)
    enc.colorIndices.push_back(static_cast<std::uint32_t>(r.read(enc.cb)));

  if (bytes.size() != enc.byte_length())
    throw FormatError("stream: length does not match size formula");
  return enc;
}

StreamHeader read_stream_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw FormatError("stream: shorter than header");
  BitReader r(bytes);
  StreamHeader h;
  h.rows = static_cast<std::uint16_t>(r.read(16));
  h.cols = static_cast<std::uint16_t>(r.read(16));
  h.grid = static_cast<std::uint16_t>(r.read(16));
  h.bDim = static_cast<std::uint16_t>(r.read(16));
  return h;
}

namespace {

struct SubTri {
  std::array<std::array<std::int64_t, 2>, 3> v;  // (row, col), scaled
  Eigen::Vector3d color;
};

using EdgeKey = std::pair<std::uint64_t, std::uint64_t>;

std::uint64_t pack_vertex(std::int64_t r, std::int64_t c) {
  return (static_cast<std::uint64_t>(r) << 32) | static_cast<std::uint64_t>(c);
}

EdgeKey edge_key(const std::array<std::int64_t, 2>& a,
                 const std::array<std::int64_t, 2>& b) {
  const std::uint64_t ka = pack_vertex(a[0], a[1]);
  const std::uint64_t kb = pack_vertex(b[0], b[1]);
  return {std::min(ka, kb), std::max(ka, kb)};
}

}  // namespace

Image smooth(const Image& img, const Triangulation& tess,
             const std::vector<Rgb>& triColors, int depth) {
  if (depth < 0 || depth > 8)
    throw std::invalid_argument("smooth: depth must be in [0, 8]");
  if (triColors.size() != tess.triangles.size())
    throw std::invalid_argument("smooth: color count mismatch");
  if (depth == 0) return img;

  const Index rows = img.rows, cols = img.cols;
  std::vector<SubTri> tris;
  tris.reserve(tess.triangles.size());
  for (std::size_t t = 0; t < tess.triangles.size(); ++t) {
    SubTri st;
    for (int i = 0; i < 3; ++i) {
      const Point& p = tess.points[static_cast<std::size_t>(tess.triangles[t].v[i])];
      st.v[static_cast<std::size_t>(i)] = {p.row, p.col};
    }
    st.color = Eigen::Vector3d(triColors[t][0], triColors[t][1], triColors[t][2]);
    tris.push_back(st);
  }

  for (int level = 0; level < depth; ++level) {
    // Edge adjacency of the current mesh (at most two triangles per edge).
    std::map<EdgeKey, std::array<std::int64_t, 2>> edges;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      for (int e = 0; e < 3; ++e) {
        const EdgeKey k = edge_key(tris[t].v[static_cast<std::size_t>(e)],
                                   tris[t].v[static_cast<std::size_t>((e + 1) % 3)]);
        auto [it, fresh] = edges.try_emplace(k, std::array<std::int64_t, 2>{-1, -1});
        it->second[fresh ? 0 : 1] = static_cast<std::int64_t>(t);
      }
    }
    const auto neighbor_color = [&](std::size_t t, int e) -> const Eigen::Vector3d* {
      const EdgeKey k = edge_key(tris[t].v[static_cast<std::size_t>(e)],
                                 tris[t].v[static_cast<std::size_t>((e + 1) % 3)]);
      const auto& pair = edges.at(k);
      const std::int64_t other =
          pair[0] == static_cast<std::int64_t>(t) ? pair[1] : pair[0];
      return other >= 0 ? &tris[static_cast<std::size_t>(other)].color : nullptr;
    };

    std::vector<SubTri> next;
    next.reserve(tris.size() * 4);
    for (std::size_t t = 0; t < tris.size(); ++t) {
      // Double all coordinates so edge midpoints stay on integers.
      std::array<std::array<std::int64_t, 2>, 3> d;
      for (int i = 0; i < 3; ++i)
        d[static_cast<std::size_t>(i)] = {tris[t].v[static_cast<std::size_t>(i)][0] * 2,
                                          tris[t].v[static_cast<std::size_t>(i)][1] * 2};
      const auto mid = [&](int i, int j) -> std::array<std::int64_t, 2> {
        return {(d[static_cast<std::size_t>(i)][0] + d[static_cast<std::size_t>(j)][0]) / 2,
                (d[static_cast<std::size_t>(i)][1] + d[static_cast<std::size_t>(j)][1]) / 2};
      };

      // Corner sub at vertex i touches the parent edges (i-1, i) and
      // (i, i+1); blend the parent with the neighbors across those edges.
      for (int i = 0; i < 3; ++i) {
        const int ePrev = (i + 2) % 3, eNext = i;
        Eigen::Vector3d acc = Eigen::Vector3d::Zero();
        int cnt = 0;
        if (const auto* c = neighbor_color(t, ePrev)) {
          acc += *c;
          ++cnt;
        }
        if (const auto* c = neighbor_color(t, eNext)) {
          acc += *c;
          ++cnt;
        }
        SubTri sub;
        sub.v = {d[static_cast<std::size_t>(i)], mid(i, (i + 1) % 3), mid(i, (i + 2) % 3)};
        sub.color = cnt == 0 ? tris[t].color
                             : 0.5 * tris[t].color + 0.5 * (acc / cnt);
        next.push_back(sub);
      }
      SubTri center;
      center.v = {mid(0, 1), mid(1, 2), mid(2, 0)};
      center.color = tris[t].color;
      next.push_back(center);
    }
    tris = std::move(next);
  }

  // Rasterize in emission order (parent canonical order, corners then
  // center), later sub-triangles overwriting shared boundary pixels.
  const std::int64_t s = std::int64_t{1} << depth;
  Image out = img;
  for (const SubTri& st : tris) {
    const std::int64_t minR = std::min({st.v[0][0], st.v[1][0], st.v[2][0]});
    const std::int64_t maxR = std::max({st.v[0][0], st.v[1][0], st.v[2][0]});
    const std::int64_t minC = std::min({st.v[0][1], st.v[1][1], st.v[2][1]});
    const std::int64_t maxC = std::max({st.v[0][1], st.v[1][1], st.v[2][1]});
    const Index r0 = std::max<Index>(0, static_cast<Index>((minR + s - 1) / s));
    const Index r1 = std::min<Index>(rows - 1, static_cast<Index>(maxR / s));
    const Index c0 = std::max<Index>(0, static_cast<Index>((minC + s - 1) / s));
    const Index c1 = std::min<Index>(cols - 1, static_cast<Index>(maxC / s));

    Rgb rgb;
    for (int ch = 0; ch < 3; ++ch)
      rgb[static_cast<std::size_t>(ch)] = static_cast<std::uint8_t>(
          std::clamp<long long>(std::llround(st.color[ch]), 0, 255));

    const auto edge = [&](int i, int j, std::int64_t pr, std::int64_t pc) {
      const auto& a = st.v[static_cast<std::size_t>(i)];
      const auto& b = st.v[static_cast<std::size_t>(j)];
      return (b[1] - a[1]) * (pr - a[0]) - (b[0] - a[0]) * (pc - a[1]);
    };
    for (Index r = r0; r <= r1; ++r) {
      for (Index c = c0; c <= c1; ++c) {
        const std::int64_t pr = r * s, pc = c * s;
        const std::int64_t s0 = edge(0, 1, pr, pc);
        const std::int64_t s1 = edge(1, 2, pr, pc);
        const std::int64_t s2 = edge(2, 0, pr, pc);
        if ((s0 <= 0 && s1 <= 0 && s2 <= 0) || (s0 >= 0 && s1 >= 0 && s2 >= 0))
          for (int ch = 0; ch < 3; ++ch)
            out.at(r, c)(ch) = rgb[static_cast<std::size_t>(ch)];
      }
    }
  }
  return out;
}

}  // namespace magic
