#include "ocflow/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace ocflow {

namespace {

constexpr double kLumR = 0.299;
constexpr double kLumG = 0.587;
constexpr double kLumB = 0.114;

std::string lower_ext(const std::string& path) {
  const std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// ---- PGM ----

int pgm_next_int(std::istream& in, const std::string& path) {
  // skips whitespace and '#' comments per the netpbm grammar
  for (;;) {
    const int c = in.peek();
    if (c == EOF) throw IoError(path + ": truncated PGM header");
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      continue;
    }
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    break;
  }
  int value = 0;
  if (!(in >> value)) throw IoError(path + ": malformed PGM header");
  return value;
}

ScalarField read_pgm(std::istream& in, const std::string& path) {
  char magic[2];
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') throw IoError(path + ": not a P5 PGM");
  const int width = pgm_next_int(in, path);
  const int height = pgm_next_int(in, path);
  const int maxval = pgm_next_int(in, path);
  if (maxval <= 0 || maxval > 65535) throw IoError(path + ": PGM maxval out of range");
  in.get();  // single whitespace after maxval

  ScalarField f(width, height, 0.0);
  const double scale = 255.0 / maxval;
  const std::size_t n = f.size();
  if (maxval < 256) {
    std::vector<std::uint8_t> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
    if (!in) throw IoError(path + ": truncated PGM pixel data");
    for (std::size_t k = 0; k < n; ++k) f.values()[k] = scale * raw[k];
  } else {
    std::vector<std::uint8_t> raw(2 * n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(2 * n));
    if (!in) throw IoError(path + ": truncated PGM pixel data");
    for (std::size_t k = 0; k < n; ++k) {
      const int hi = raw[2 * k];
      const int lo = raw[2 * k + 1];  // big-endian per netpbm
      f.values()[k] = scale * (hi * 256 + lo);
    }
  }
  return f;
}

void write_pgm(const std::string& path, const ScalarField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "P5\n" << f.width() << " " << f.height() << "\n255\n";
  std::vector<std::uint8_t> raw(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    raw[k] = static_cast<std::uint8_t>(std::lround(std::clamp(f.values()[k], 0.0, 255.0)));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("failed while writing " + path);
}

// ---- PFM ----

bool host_is_little_endian() {
  const std::uint16_t probe = 1;
  return *reinterpret_cast<const std::uint8_t*>(&probe) == 1;
}

ScalarField read_pfm(std::istream& in, const std::string& path) {
  std::string magic;
  in >> magic;
  const bool color = (magic == "PF");
  if (!color && magic != "Pf") throw IoError(path + ": not a PFM file");
  int width = 0;
  int height = 0;
  double scale = 0.0;
  in >> width >> height >> scale;
  if (!in || width <= 0 || height <= 0 || scale == 0.0) throw IoError(path + ": bad PFM header");
  in.get();  // newline before the raster
  const bool file_little = scale < 0.0;
  const int channels = color ? 3 : 1;
  std::vector<float> row(static_cast<std::size_t>(width) * channels);
  ScalarField f(width, height, 0.0);
  // PFM stores rows bottom-to-top
  for (int j = height - 1; j >= 0; --j) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw IoError(path + ": truncated PFM raster");
    if (file_little != host_is_little_endian()) {
      for (float& x : row) {
        std::uint32_t bits;
        std::memcpy(&bits, &x, 4);
        bits = __builtin_bswap32(bits);
        std::memcpy(&x, &bits, 4);
      }
    }
    for (int i = 0; i < width; ++i) {
      if (color) {
        f(i, j) = kLumR * row[3 * i] + kLumG * row[3 * i + 1] + kLumB * row[3 * i + 2];
      } else {
        f(i, j) = row[i];
      }
    }
  }
  return f;
}

void write_pfm(const std::string& path, const ScalarField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "Pf\n" << f.width() << " " << f.height() << "\n-1.0\n";
  std::vector<float> row(f.width());
  for (int j = f.height() - 1; j >= 0; --j) {
    for (int i = 0; i < f.width(); ++i) row[i] = static_cast<float>(f(i, j));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("failed while writing " + path);
}

// ---- PNG ----

struct FileCloser {
  void operator()(std::FILE* fp) const {
    if (fp) std::fclose(fp);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

ScalarField read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError(path + ": png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError(path + ": png_create_info_struct failed");
  }
  std::vector<std::vector<png_byte>> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": libpng failed to decode");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int depth = png_get_bit_depth(png, info);
  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": unsupported PNG channel layout");
  }

  const std::size_t row_bytes = png_get_rowbytes(png, info);
  rows.assign(height, std::vector<png_byte>(row_bytes));
  std::vector<png_bytep> row_ptrs(height);
  for (int j = 0; j < height; ++j) row_ptrs[j] = rows[j].data();
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  ScalarField f(width, height, 0.0);
  const double scale = depth == 16 ? 255.0 / 65535.0 : 1.0;
  for (int j = 0; j < height; ++j) {
    const png_byte* row = rows[j].data();
    for (int i = 0; i < width; ++i) {
      double sample;
      if (channels == 1) {
        sample = depth == 16 ? scale * (row[2 * i] * 256 + row[2 * i + 1])
                             : static_cast<double>(row[i]);
      } else {
        double rgb[3];
        for (int c = 0; c < 3; ++c) {
          rgb[c] = depth == 16
                       ? scale * (row[2 * (3 * i + c)] * 256 + row[2 * (3 * i + c) + 1])
                       : static_cast<double>(row[3 * i + c]);
        }
        sample = kLumR * rgb[0] + kLumG * rgb[1] + kLumB * rgb[2];
      }
      f(i, j) = sample;
    }
  }
  return f;
}

void write_png(const std::string& path, const ScalarField& f) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open " + path + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError(path + ": png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError(path + ": png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path + ": libpng failed to encode");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, f.width(), f.height(), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(f.width());
  for (int j = 0; j < f.height(); ++j) {
    for (int i = 0; i < f.width(); ++i) {
      row[i] = static_cast<png_byte>(std::lround(std::clamp(f(i, j), 0.0, 255.0)));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

ScalarField read_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in) throw IoError(path + ": file too short");
  in.seekg(0);
  if (magic[0] == 'P' && magic[1] == '5') return read_pgm(in, path);
  if (magic[0] == 'P' && (magic[1] == 'f' || magic[1] == 'F')) return read_pfm(in, path);
  if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P') {
    in.close();
    return read_png(path);
  }
  throw IoError(path + ": unrecognized image format (expected PGM, PFM, or PNG)");
}

void write_image(const std::string& path, const ScalarField& f) {
  const std::string ext = lower_ext(path);
  if (ext == "png") {
    write_png(path, f);
  } else if (ext == "pgm") {
    write_pgm(path, f);
  } else if (ext == "pfm") {
    write_pfm(path, f);
  } else {
    throw IoError(path + ": unsupported output extension ." + ext);
  }
}

void write_flo(const std::string& path, const VectorField& b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const char magic[4] = {'P', 'I', 'E', 'H'};
  out.write(magic, 4);
  const std::int32_t w = b.width();
  const std::int32_t h = b.height();
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  std::vector<float> row(static_cast<std::size_t>(2) * b.width());
  for (int j = 0; j < b.height(); ++j) {
    for (int i = 0; i < b.width(); ++i) {
      row[2 * i] = static_cast<float>(b.v(i, j));
      row[2 * i + 1] = static_cast<float>(b.w(i, j));
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("failed while writing " + path);
}

VectorField read_flo(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "PIEH", 4) != 0) throw IoError(path + ": not a .flo file");
  std::int32_t w = 0;
  std::int32_t h = 0;
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  if (!in || w <= 0 || h <= 0) throw IoError(path + ": bad .flo dimensions");
  VectorField b(w, h);
  std::vector<float> row(static_cast<std::size_t>(2) * w);
  for (int j = 0; j < h; ++j) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw IoError(path + ": truncated .flo raster");
    for (int i = 0; i < w; ++i) {
      b.v(i, j) = row[2 * i];
      b.w(i, j) = row[2 * i + 1];
    }
  }
  return b;
}

}  // namespace ocflow
