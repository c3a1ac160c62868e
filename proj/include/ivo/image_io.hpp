#pragma once

#include <string>

#include "ivo/errors.hpp"
#include "ivo/grid.hpp"

namespace ivo {

// Binary PGM (P5). 16-bit samples are big-endian per the Netpbm spec.
void write_pgm8(const GridU8& img, const std::string& path);
void write_pgm16(const GridU16& img, const std::string& path);
GridU8 read_pgm8(const std::string& path);
GridU16 read_pgm16(const std::string& path);

// Writes `contents` to a temporary file in the target directory and renames
// it into place.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace ivo
