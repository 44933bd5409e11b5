#include "magic/image.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "magic/errors.hpp"

namespace magic {
namespace {

void check_dims(std::uint64_t rows, std::uint64_t cols, const std::string& what) {
  if (rows < 1 || cols < 1) throw FormatError(what + ": empty image");
  if (rows > static_cast<std::uint64_t>(kMaxImageDim) ||
      cols > static_cast<std::uint64_t>(kMaxImageDim))
    throw FormatError(what + ": dimension exceeds 16-bit limit (" +
                      std::to_string(rows) + "x" + std::to_string(cols) + ")");
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Image load_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path.string());

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }

  Image img;
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("malformed PNG: " + path.string());
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  check_dims(height, width, path.string());

  // Normalize every variant libpng can hand us to 8-bit RGB.
  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  img.rows = static_cast<Index>(height);
  img.cols = static_cast<Index>(width);
  img.pixels.resize(img.pixel_count(), 3);

  row_ptrs.resize(height);
  for (png_uint_32 r = 0; r < height; ++r)
    row_ptrs[r] = reinterpret_cast<png_bytep>(img.pixels.data()) +
                  static_cast<std::size_t>(r) * width * 3;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void save_png(const Image& img, const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + path.string());

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed: " + path.string());
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.cols),
               static_cast<png_uint_32>(img.rows), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (Index r = 0; r < img.rows; ++r)
    png_write_row(png, const_cast<png_bytep>(img.pixels.data()) +
                           static_cast<std::size_t>(r) * img.cols * 3);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Binary PPM, maximum value 255. Comments and arbitrary whitespace in the
// header are tolerated on read.
int ppm_token(std::istream& in) {
  int c = in.get();
  while (c == '#' || std::isspace(c)) {
    if (c == '#')
      while (c != '\n' && c != EOF) c = in.get();
    c = in.get();
  }
  if (c == EOF) throw FormatError("PPM header truncated");
  int value = 0;
  while (std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

Image load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char m0 = 0, m1 = 0;
  in.get(m0).get(m1);
  if (m0 != 'P' || m1 != '6') throw FormatError("not a P6 PPM: " + path.string());

  const int width = ppm_token(in);
  const int height = ppm_token(in);
  const int maxval = ppm_token(in);
  if (maxval != 255) throw FormatError("unsupported PPM maxval");
  check_dims(static_cast<std::uint64_t>(height), static_cast<std::uint64_t>(width),
             path.string());

  Image img;
  img.rows = height;
  img.cols = width;
  img.pixels.resize(img.pixel_count(), 3);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw FormatError("PPM pixel data truncated: " + path.string());
  return img;
}

void save_ppm(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << img.cols << " " << img.rows << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw IoError("PPM write failed: " + path.string());
}

}  // namespace

Image Image::filled(Index rows, Index cols, std::uint8_t r, std::uint8_t g,
                    std::uint8_t b) {
  Image img;
  img.rows = rows;
  img.cols = cols;
  img.pixels.resize(img.pixel_count(), 3);
  img.pixels.col(0).setConstant(r);
  img.pixels.col(1).setConstant(g);
  img.pixels.col(2).setConstant(b);
  return img;
}

Image load_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path.string());
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), 8);
  probe.close();

  static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (std::memcmp(sig, png_sig, 8) == 0) return load_png(path);
  if (sig[0] == 'P' && sig[1] == '6') return load_ppm(path);
  throw FormatError("unsupported image format: " + path.string());
}

void save_image(const Image& img, const std::filesystem::path& path) {
  check_dims(static_cast<std::uint64_t>(img.rows),
             static_cast<std::uint64_t>(img.cols), path.string());
  const auto ext = path.extension().string();
  if (ext == ".png") return save_png(img, path);
  if (ext == ".ppm") return save_ppm(img, path);
  throw FormatError("unsupported output extension: " + path.string());
}

GrayImage to_gray(const Image& img) {
  GrayImage gray;
  gray.values.resize(img.rows, img.cols);
  // Integer BT.601: floor((299 R + 587 G + 114 B + 500) / 1000) is exactly
  // round-half-up of the weighted sum, and keeps the conversion bit-stable.
  for (Index i = 0; i < img.pixel_count(); ++i) {
    const std::uint32_t t = 299u * img.pixels(i, 0) + 587u * img.pixels(i, 1) +
                            114u * img.pixels(i, 2);
    gray.values(i / img.cols, i % img.cols) =
        static_cast<std::uint8_t>((t + 500u) / 1000u);
  }
  return gray;
}

}  // namespace magic
