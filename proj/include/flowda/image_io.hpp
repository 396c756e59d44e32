#pragma once

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "flowda/core.hpp"
#include "flowda/errors.hpp"

namespace flowda {

namespace detail {

inline std::uint8_t to_byte(double v) {
  const double s = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  return static_cast<std::uint8_t>(s * 255.0 + 0.5);
}

inline void skip_pnm_junk(std::istream& in) {
  for (;;) {
    const int ch = in.peek();
    if (ch == '#') {
      std::string line;
      std::getline(in, line);
    } else if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

}  // namespace detail

// Binary PPM (P6, C=3) or PGM (P5, C=1), maxval 255.
inline void write_pnm(const std::string& path, const Image& image) {
  require(image.c == 1 || image.c == 3, "write_pnm: channel count must be 1 or 3");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_pnm: cannot open '" + path + "' for writing");
  out << (image.c == 3 ? "P6" : "P5") << "\n" << image.w << " " << image.h << "\n255\n";
  std::vector<std::uint8_t> row(static_cast<std::size_t>(image.w) * image.c);
  for (int y = 0; y < image.h; ++y) {
    for (int x = 0; x < image.w; ++x)
      for (int ch = 0; ch < image.c; ++ch) row[static_cast<std::size_t>(x) * image.c + ch] = detail::to_byte(image.at(y, x, ch));
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw IoError("write_pnm: short write to '" + path + "'");
}

inline Image read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_pnm: cannot open '" + path + "'");
  std::string tag;
  in >> tag;
  int channels = 0;
  if (tag == "P6") channels = 3;
  else if (tag == "P5") channels = 1;
  else throw ParseError(ParseError::Kind::bad_magic, "read_pnm: unsupported format tag '" + tag + "' in '" + path + "'");

  detail::skip_pnm_junk(in);
  int w = 0, h = 0, maxval = 0;
  in >> w;
  detail::skip_pnm_junk(in);
  in >> h;
  detail::skip_pnm_junk(in);
  in >> maxval;
  if (!in || w <= 0 || h <= 0) throw ParseError(ParseError::Kind::malformed, "read_pnm: bad header in '" + path + "'");
  if (maxval != 255) throw ParseError(ParseError::Kind::malformed, "read_pnm: only maxval 255 supported: '" + path + "'");
  in.get();  // single whitespace after maxval

  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * channels);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
    throw ParseError(ParseError::Kind::truncated, "read_pnm: truncated payload in '" + path + "'");

  Image image(h, w, channels);
  for (std::size_t i = 0; i < bytes.size(); ++i) image.data[i] = bytes[i] / 255.0;
  return image;
}

inline void write_mask_pnm(const std::string& path, const BinaryMask& mask) {
  Image img(mask.h, mask.w, 1);
  for (int y = 0; y < mask.h; ++y)
    for (int x = 0; x < mask.w; ++x) img.at(y, x, 0) = mask.at(y, x) ? 1.0 : 0.0;
  write_pnm(path, img);
}

inline BinaryMask read_mask_pnm(const std::string& path) {
  const Image img = read_pnm(path);
  require(img.c == 1, "read_mask_pnm: mask image must be single channel");
  BinaryMask mask(img.h, img.w);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) mask.at(y, x) = img.at(y, x, 0) >= 0.5 ? 1 : 0;
  return mask;
}

// Minimal PNG writer: 8-bit RGB (or gray), one IDAT, filter type 0 rows,
// zlib-deflated. Enough for visualization output; no reader counterpart.
inline void write_png(const std::string& path, const Image& image) {
  require(image.c == 1 || image.c == 3, "write_png: channel count must be 1 or 3");

  const int bpp = image.c;
  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(image.h) * (1 + static_cast<std::size_t>(image.w) * bpp));
  for (int y = 0; y < image.h; ++y) {
    raw.push_back(0);  // filter type: none
    for (int x = 0; x < image.w; ++x)
      for (int ch = 0; ch < image.c; ++ch) raw.push_back(detail::to_byte(image.at(y, x, ch)));
  }

  uLongf zcap = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> zdata(zcap);
  if (compress2(zdata.data(), &zcap, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw IoError("write_png: deflate failed for '" + path + "'");
  zdata.resize(zcap);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_png: cannot open '" + path + "' for writing");

  auto put_u32 = [](std::vector<std::uint8_t>& buf, std::uint32_t v) {
    buf.push_back(static_cast<std::uint8_t>(v >> 24));
    buf.push_back(static_cast<std::uint8_t>(v >> 16));
    buf.push_back(static_cast<std::uint8_t>(v >> 8));
    buf.push_back(static_cast<std::uint8_t>(v));
  };
  auto write_chunk = [&](const char type[4], const std::vector<std::uint8_t>& payload) {
    std::vector<std::uint8_t> buf;
    put_u32(buf, static_cast<std::uint32_t>(payload.size()));
    buf.insert(buf.end(), type, type + 4);
    buf.insert(buf.end(), payload.begin(), payload.end());
    const uLong crc = crc32(crc32(0L, Z_NULL, 0), buf.data() + 4, static_cast<uInt>(buf.size() - 4));
    put_u32(buf, static_cast<std::uint32_t>(crc));
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  };

  static const std::uint8_t signature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  out.write(reinterpret_cast<const char*>(signature), 8);

  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(image.w));
  put_u32(ihdr, static_cast<std::uint32_t>(image.h));
  ihdr.push_back(8);                                  // bit depth
  ihdr.push_back(image.c == 3 ? 2 : 0);               // color type: RGB or gray
  ihdr.push_back(0);                                  // compression
  ihdr.push_back(0);                                  // filter
  ihdr.push_back(0);                                  // interlace
  write_chunk("IHDR", ihdr);
  write_chunk("IDAT", zdata);
  write_chunk("IEND", {});
  if (!out) throw IoError("write_png: short write to '" + path + "'");
}

// Dispatch on extension so callers can name either format.
inline void write_image(const std::string& path, const Image& image) {
  const auto dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "png") write_png(path, image);
  else write_pnm(path, image);
}

}  // namespace flowda
