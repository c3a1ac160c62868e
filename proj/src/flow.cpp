#include "ivo/flow.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "ivo/segmentation.hpp"

namespace ivo {

namespace {
constexpr float kFloSentinel = 1e9f;
constexpr char kFloMagic[4] = {'P', 'I', 'E', 'H'};
}  // namespace

FlowField FlowField::zeros(int h, int w, bool all_valid) {
  FlowField f;
  f.h = h;
  f.w = w;
  f.u = GridF::Zero(h, w);
  f.v = GridF::Zero(h, w);
  f.valid = GridU8::Constant(h, w, all_valid ? 1 : 0);
  return f;
}

FlowField mask_flow(const FlowField& flow, const SegMask& mask) {
  if (flow.h != mask.h || flow.w != mask.w) {
    throw DimensionMismatch("mask_flow: flow and mask dimensions differ");
  }
  FlowField out = flow;
  for (int i = 0; i < flow.h; ++i) {
    for (int j = 0; j < flow.w; ++j) {
      if (mask.m(i, j)) {
        out.u(i, j) = 0.0f;
        out.v(i, j) = 0.0f;
      }
    }
  }
  return out;
}

FlowField downsample_flow(const FlowField& flow, int factor) {
  if (factor < 1 || flow.h % factor != 0 || flow.w % factor != 0) {
    throw NotDivisible("downsample_flow: dimensions not divisible by factor");
  }
  const int oh = flow.h / factor;
  const int ow = flow.w / factor;
  FlowField out = FlowField::zeros(oh, ow, false);
  for (int bi = 0; bi < oh; ++bi) {
    for (int bj = 0; bj < ow; ++bj) {
      double su = 0.0, sv = 0.0;
      int n = 0;
      for (int di = 0; di < factor; ++di) {
        for (int dj = 0; dj < factor; ++dj) {
          const int i = bi * factor + di;
          const int j = bj * factor + dj;
          if (flow.valid(i, j)) {
            su += flow.u(i, j);
            sv += flow.v(i, j);
            ++n;
          }
        }
      }
      if (n > 0) {
        out.u(bi, bj) = static_cast<float>(su / n / factor);
        out.v(bi, bj) = static_cast<float>(sv / n / factor);
        out.valid(bi, bj) = 1;
      }
    }
  }
  return out;
}

void write_flo(const FlowField& flow, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("write_flo: cannot open " + path);
  f.write(kFloMagic, 4);
  const std::int32_t w = flow.w, h = flow.h;
  f.write(reinterpret_cast<const char*>(&w), 4);
  f.write(reinterpret_cast<const char*>(&h), 4);
  std::vector<float> row(static_cast<size_t>(flow.w) * 2);
  for (int i = 0; i < flow.h; ++i) {
    for (int j = 0; j < flow.w; ++j) {
      if (flow.valid(i, j)) {
        row[2 * j] = flow.u(i, j);
        row[2 * j + 1] = flow.v(i, j);
      } else {
        row[2 * j] = kFloSentinel;
        row[2 * j + 1] = kFloSentinel;
      }
    }
    f.write(reinterpret_cast<const char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!f) throw Error("write_flo: write failed for " + path);
}

FlowField read_flo(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("read_flo: cannot open " + path);
  char magic[4];
  if (!f.read(magic, 4) || std::memcmp(magic, kFloMagic, 4) != 0) {
    throw BadMagic("read_flo: bad magic in " + path);
  }
  std::int32_t w = 0, h = 0;
  if (!f.read(reinterpret_cast<char*>(&w), 4) ||
      !f.read(reinterpret_cast<char*>(&h), 4) || w < 1 || h < 1) {
    throw TruncatedFile("read_flo: truncated header in " + path);
  }
  FlowField flow = FlowField::zeros(h, w, false);
  std::vector<float> row(static_cast<size_t>(w) * 2);
  for (int i = 0; i < h; ++i) {
    if (!f.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)))) {
      throw TruncatedFile("read_flo: truncated data in " + path);
    }
    for (int j = 0; j < w; ++j) {
      const float u = row[2 * j], v = row[2 * j + 1];
      if (std::abs(u) >= kFloSentinel || std::abs(v) >= kFloSentinel ||
          !std::isfinite(u) || !std::isfinite(v)) {
        continue;  // invalid pixel, stays (0,0)
      }
      flow.u(i, j) = u;
      flow.v(i, j) = v;
      flow.valid(i, j) = 1;
    }
  }
  return flow;
}

}  // namespace ivo
