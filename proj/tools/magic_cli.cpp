// magic: batch CLI for the triangulation codec.
//
// Subcommands: acquire (learn a knowledge package from a corpus), encode,
// decode, stats (BPP summary of .magic streams), ctcutoff (energy cutoff).
// Exit codes: 0 success, 1 runtime/I-O failure, 2 bad command line.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "magic/acquisition.hpp"
#include "magic/analysis.hpp"
#include "magic/codec.hpp"
#include "magic/errors.hpp"

namespace fs = std::filesystem;

namespace {

bool has_ext(const fs::path& p, std::initializer_list<const char*> exts) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const char* want : exts)
    if (e == want) return true;
  return false;
}

/// Files or directories -> sorted file list; directories contribute their
/// matching entries (non-recursive), sorted for reproducible batch order.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& args,
                                    std::initializer_list<const char*> exts) {
  std::vector<fs::path> out;
  for (const std::string& a : args) {
    const fs::path p(a);
    if (fs::is_directory(p)) {
      std::vector<fs::path> dir;
      for (const auto& entry : fs::directory_iterator(p))
        if (entry.is_regular_file() && has_ext(entry.path(), exts))
          dir.push_back(entry.path());
      std::sort(dir.begin(), dir.end());
      out.insert(out.end(), dir.begin(), dir.end());
    } else {
      if (!fs::exists(p)) throw magic::IoError("no such file: " + a);
      out.push_back(p);
    }
  }
  if (out.empty()) throw magic::IoError("no input files");
  return out;
}

fs::path batch_output_path(const fs::path& outArg, bool multiple,
                           const fs::path& input, const char* newExt) {
  const bool isDir = fs::is_directory(outArg) || multiple;
  if (!isDir) return outArg;
  fs::create_directories(outArg);
  return outArg / input.filename().replace_extension(newExt);
}

std::vector<std::uint8_t> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw magic::IoError("cannot open: " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw magic::IoError("cannot open for writing: " + p.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw magic::IoError("write failed: " + p.string());
}

magic::RoiRect parse_roi(const std::string& s) {
  magic::RoiRect r;
  char comma;
  std::istringstream in(s);
  if (!(in >> r.r0 >> comma >> r.c0 >> comma >> r.r1 >> comma >> r.c1 >> comma >>
        r.droi) ||
      !in.eof())
    throw CLI::ValidationError("--roi", "expected r0,c0,r1,c1,droi");
  return r;
}

int run(int argc, char** argv) {
  CLI::App app{"MAGIC-style triangulation image codec"};
  app.require_subcommand(1);

  // ---- acquire ----
  auto* acq = app.add_subcommand("acquire", "learn a knowledge package from images");
  std::vector<std::string> acqIn;
  std::string acqOut;
  magic::AcquisitionParams params;
  acq->add_option("--in", acqIn, "input images or directories")->required();
  acq->add_option("--out", acqOut, "output package path")->required();
  acq->add_option("--bdim", params.bDim, "block dimension");
  acq->add_option("--iters", params.iterLimit, "triangle split rounds");
  acq->add_option("--pw", params.pw, "prune window side");
  acq->add_option("--th", params.th, "split std-dev threshold");
  acq->add_option("--cb", params.cb, "color index bits");
  acq->add_option("--grid-divisor", params.gridDivisor, "grid = ceil((rows+cols)/divisor)");
  acq->add_option("--dict-size", params.patternDictSize, "pattern dictionary entries");
  acq->add_option("--seed-pattern", params.patternSeed, "pattern dictionary seed");
  acq->add_option("--seed-kmeans", params.kmeansSeed, "k-means seed");
  acq->add_option("--seed-train", params.trainSeed, "training seed");
  acq->add_option("--kmeans-iters", params.kmeansIters, "k-means iteration cap");
  acq->add_option("--epochs", params.epochs, "training epochs");
  acq->add_option("--lr", params.lr, "learning rate");

  // ---- encode ----
  auto* enc = app.add_subcommand("encode", "encode images to .magic streams");
  std::string encPkg, encOut;
  std::vector<std::string> encIn, encRoi;
  magic::EncodeParams ep;
  enc->add_option("--pkg", encPkg, "knowledge package")->required();
  enc->add_option("--d", ep.d, "quality divisor (higher = smaller)");
  enc->add_option("--grid", ep.grid, "grid step override (0 = auto)");
  enc->add_option("--roi", encRoi, "ROI rectangle r0,c0,r1,c1,droi (repeatable)");
  enc->add_option("--out", encOut, "output file (single input) or directory")->required();
  enc->add_option("inputs", encIn, "images or directories")->required();

  // ---- decode ----
  auto* dec = app.add_subcommand("decode", "decode .magic streams to images");
  std::string decPkg, decOut;
  std::vector<std::string> decIn;
  int smoothDepth = 0;
  dec->add_option("--pkg", decPkg, "knowledge package")->required();
  dec->add_option("--smooth", smoothDepth, "subdivision smoothing depth");
  dec->add_option("--out", decOut, "output file (single input) or directory")->required();
  dec->add_option("inputs", decIn, "streams or directories")->required();

  // ---- stats ----
  auto* st = app.add_subcommand("stats", "BPP summary of .magic streams (JSON to stdout)");
  std::vector<std::string> stIn;
  std::string stCsv;
  st->add_option("inputs", stIn, ".magic files or directories")->required();
  st->add_option("--csv", stCsv, "also write per-file CSV here");

  // ---- ctcutoff ----
  auto* ct = app.add_subcommand("ctcutoff", "computation/transmission energy cutoff");
  magic::CtInputs cti;
  ct->add_option("--e1", cti.e1, "mean encode seconds, this codec")->required();
  ct->add_option("--e2", cti.e2, "mean encode seconds, competitor")->required();
  ct->add_option("--i1", cti.i1, "mean encoded bytes, this codec")->required();
  ct->add_option("--i2", cti.i2, "mean encoded bytes, competitor")->required();
  ct->add_option("--f", cti.f, "CPU clock in Hz")->required();

  try {
    app.parse(argc, argv);
    for (const std::string& s : encRoi) ep.roi.push_back(parse_roi(s));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (acq->parsed()) {
    const auto paths = expand_inputs(acqIn, {".png", ".ppm"});
    const magic::AcquisitionResult res = magic::acquire(paths, params);
    magic::save_package(res.package, acqOut);
    std::cout << "package written to " << acqOut << " (" << paths.size()
              << " images, " << res.training.targets.size() << " blocks, final loss "
              << (res.trainReport.epoch_loss.empty() ? 0.0
                                                     : res.trainReport.epoch_loss.back())
              << ")\n";
    return 0;
  }

  if (enc->parsed()) {
    const magic::KnowledgePackage kp = magic::load_package(encPkg);
    const auto inputs = expand_inputs(encIn, {".png", ".ppm"});
    for (const fs::path& in : inputs) {
      const magic::Image img = magic::load_image(in);
      const magic::EncodedImage e = magic::encode(img, kp, ep);
      const auto bytes = magic::to_bytes(e);
      const fs::path out = batch_output_path(encOut, inputs.size() > 1, in, ".magic");
      write_file(out, bytes);
      std::cout << out.string() << ": " << bytes.size() << " bytes, bpp "
                << 8.0 * static_cast<double>(bytes.size()) /
                       static_cast<double>(img.pixel_count())
                << "\n";
    }
    return 0;
  }

  if (dec->parsed()) {
    const magic::KnowledgePackage kp = magic::load_package(decPkg);
    const auto inputs = expand_inputs(decIn, {".magic"});
    for (const fs::path& in : inputs) {
      const magic::EncodedImage e = magic::from_bytes(read_file(in), kp);
      magic::Image img = magic::decode(e, kp);
      if (smoothDepth > 0) {
        std::vector<magic::Rgb> colors;
        colors.reserve(e.colorIndices.size());
        for (const std::uint32_t ci : e.colorIndices)
          colors.push_back(kp.colorDict.entries[ci]);
        img = magic::smooth(img, e.tess, colors, smoothDepth);
      }
      const fs::path out = batch_output_path(decOut, inputs.size() > 1, in, ".png");
      magic::save_image(img, out);
      std::cout << out.string() << ": " << img.rows << "x" << img.cols << "\n";
    }
    return 0;
  }

  if (st->parsed()) {
    const auto inputs = expand_inputs(stIn, {".magic"});
    std::vector<magic::FileBpp> rows;
    std::vector<double> bpp;
    for (const fs::path& in : inputs) {
      const auto bytes = read_file(in);
      const magic::StreamHeader h = magic::read_stream_header(bytes);
      magic::FileBpp fb;
      fb.file = in.string();
      fb.bytes = bytes.size();
      fb.bpp = 8.0 * static_cast<double>(bytes.size()) /
               (static_cast<double>(h.rows) * static_cast<double>(h.cols));
      rows.push_back(fb);
      bpp.push_back(fb.bpp);
    }
    if (!stCsv.empty()) {
      const std::string csv = magic::stats_csv(rows);
      std::ofstream out(stCsv, std::ios::trunc);
      if (!out) throw magic::IoError("cannot open for writing: " + stCsv);
      out << csv;
    }
    std::cout << magic::stats_json(magic::dataset_stats(bpp)) << "\n";
    return 0;
  }

  std::cout << magic::ct_cutoff(cti) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
