#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "flowda/core.hpp"
#include "flowda/errors.hpp"

namespace flowda {

// Middlebury .flo layout: float 202021.25 as a 4-byte magic ("PIEH" in
// little-endian bytes), int32 width, int32 height, then height*width*2
// little-endian float32 interleaved (u, v).
namespace flo {
constexpr float kMagic = 202021.25f;
constexpr int kMaxDim = 100000;
}  // namespace flo

inline FlowField read_flow_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_flow_file: cannot open '" + path + "'");

  float magic = 0.0f;
  if (!in.read(reinterpret_cast<char*>(&magic), sizeof magic))
    throw ParseError(ParseError::Kind::truncated, "read_flow_file: file shorter than header: '" + path + "'");
  if (magic != flo::kMagic)
    throw ParseError(ParseError::Kind::bad_magic, "read_flow_file: bad magic tag in '" + path + "'");

  std::int32_t w = 0, h = 0;
  if (!in.read(reinterpret_cast<char*>(&w), sizeof w) || !in.read(reinterpret_cast<char*>(&h), sizeof h))
    throw ParseError(ParseError::Kind::truncated, "read_flow_file: truncated header in '" + path + "'");
  if (w <= 0 || h <= 0 || w > flo::kMaxDim || h > flo::kMaxDim)
    throw ParseError(ParseError::Kind::malformed, "read_flow_file: implausible dimensions in '" + path + "'");

  std::vector<float> payload(static_cast<std::size_t>(w) * h * 2);
  if (!in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(float))))
    throw ParseError(ParseError::Kind::truncated, "read_flow_file: truncated payload in '" + path + "'");

  FlowField flow(h, w);
  for (std::size_t i = 0; i < payload.size(); ++i) flow.data[i] = static_cast<double>(payload[i]);
  return flow;
}

inline void write_flow_file(const std::string& path, const FlowField& flow) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_flow_file: cannot open '" + path + "' for writing");

  const float magic = flo::kMagic;
  const std::int32_t w = flow.w, h = flow.h;
  out.write(reinterpret_cast<const char*>(&magic), sizeof magic);
  out.write(reinterpret_cast<const char*>(&w), sizeof w);
  out.write(reinterpret_cast<const char*>(&h), sizeof h);

  std::vector<float> payload(flow.data.size());
  for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<float>(flow.data[i]);
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (!out) throw IoError("write_flow_file: short write to '" + path + "'");
}

}  // namespace flowda
