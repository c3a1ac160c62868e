#pragma once

#include <string>

#include "ivo/errors.hpp"
#include "ivo/grid.hpp"

namespace ivo {

struct SegMask;

/// Dense optical flow with a per-pixel validity bit. Vectors are expressed
/// in the pixel units of this grid's own resolution; invalid pixels carry
/// (0, 0) rather than NaN so arithmetic stays deterministic.
struct FlowField {
  int h = 0, w = 0;
  GridF u, v;
  GridU8 valid;  // 1 = valid

  static FlowField zeros(int h, int w, bool all_valid = true);
  int valid_count() const { return static_cast<int>((valid != 0).count()); }
};

/// Zeros the flow wherever mask = 1 (dynamic). Validity is unchanged.
FlowField mask_flow(const FlowField& flow, const SegMask& mask);

/// Block-mean downsampling by `factor`. Each output cell averages the valid
/// source flow of its factor x factor block and divides by `factor`, so the
/// result is expressed in output-grid pixels. Cells with no valid source
/// pixel are invalid.
FlowField downsample_flow(const FlowField& flow, int factor);

/// Middlebury .flo I/O: magic "PIEH", int32 width, int32 height, then
/// row-major interleaved float32 (u, v), little-endian. Invalid pixels are
/// stored as the sentinel value 1e9.
FlowField read_flo(const std::string& path);
void write_flo(const FlowField& flow, const std::string& path);

}  // namespace ivo
