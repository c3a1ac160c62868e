#include "ivo/image_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace ivo {

namespace {

void write_pgm_header(std::ostream& os, int w, int h, int maxval) {
  os << "P5\n" << w << " " << h << "\n" << maxval << "\n";
}

struct PgmHeader {
  int w = 0, h = 0, maxval = 0;
};

PgmHeader read_pgm_header(std::istream& is, const std::string& path) {
  std::string magic;
  is >> magic;
  if (magic != "P5") throw BadMagic("read_pgm: not a binary PGM: " + path);
  PgmHeader hdr;
  // Netpbm allows '#' comments between tokens.
  auto next_int = [&](int& out) {
    while (true) {
      is >> std::ws;
      if (is.peek() == '#') {
        std::string line;
        std::getline(is, line);
        continue;
      }
      if (!(is >> out)) throw TruncatedFile("read_pgm: bad header: " + path);
      return;
    }
  };
  next_int(hdr.w);
  next_int(hdr.h);
  next_int(hdr.maxval);
  is.get();  // single whitespace before raster
  if (hdr.w < 1 || hdr.h < 1) {
    throw TruncatedFile("read_pgm: bad dimensions: " + path);
  }
  return hdr;
}

}  // namespace

void write_pgm8(const GridU8& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("write_pgm8: cannot open " + path);
  write_pgm_header(f, static_cast<int>(img.cols()),
                   static_cast<int>(img.rows()), 255);
  f.write(reinterpret_cast<const char*>(img.data()),
          static_cast<std::streamsize>(img.size()));
  if (!f) throw Error("write_pgm8: write failed for " + path);
}

void write_pgm16(const GridU16& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("write_pgm16: cannot open " + path);
  write_pgm_header(f, static_cast<int>(img.cols()),
                   static_cast<int>(img.rows()), 65535);
  std::vector<unsigned char> buf(static_cast<size_t>(img.size()) * 2);
  size_t n = 0;
  for (Eigen::Index i = 0; i < img.rows(); ++i) {
    for (Eigen::Index j = 0; j < img.cols(); ++j) {
      const std::uint16_t v = img(i, j);
      buf[n++] = static_cast<unsigned char>(v >> 8);  // big-endian
      buf[n++] = static_cast<unsigned char>(v & 0xff);
    }
  }
  f.write(reinterpret_cast<const char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  if (!f) throw Error("write_pgm16: write failed for " + path);
}

GridU8 read_pgm8(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("read_pgm8: cannot open " + path);
  const PgmHeader hdr = read_pgm_header(f, path);
  if (hdr.maxval != 255) throw BadMagic("read_pgm8: not 8-bit: " + path);
  GridU8 img(hdr.h, hdr.w);
  if (!f.read(reinterpret_cast<char*>(img.data()),
              static_cast<std::streamsize>(img.size()))) {
    throw TruncatedFile("read_pgm8: truncated raster: " + path);
  }
  return img;
}

GridU16 read_pgm16(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("read_pgm16: cannot open " + path);
  const PgmHeader hdr = read_pgm_header(f, path);
  if (hdr.maxval != 65535) throw BadMagic("read_pgm16: not 16-bit: " + path);
  std::vector<unsigned char> buf(static_cast<size_t>(hdr.w) * hdr.h * 2);
  if (!f.read(reinterpret_cast<char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()))) {
    throw TruncatedFile("read_pgm16: truncated raster: " + path);
  }
  GridU16 img(hdr.h, hdr.w);
  size_t n = 0;
  for (int i = 0; i < hdr.h; ++i) {
    for (int j = 0; j < hdr.w; ++j) {
      img(i, j) = static_cast<std::uint16_t>((buf[n] << 8) | buf[n + 1]);
      n += 2;
    }
  }
  return img;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw Error("write_file_atomic: cannot open " + tmp);
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!f) throw Error("write_file_atomic: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw Error("write_file_atomic: rename failed for " + path);
  }
}

}  // namespace ivo
