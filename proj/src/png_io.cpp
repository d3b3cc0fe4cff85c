// SPDX-License-Identifier: Apache-2.0
#include "thinkgrasp/png_io.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace thinkgrasp {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(std::uint8_t(v >> 24));
  out.push_back(std::uint8_t(v >> 16));
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
               const std::vector<std::uint8_t>& data) {
  put_u32(out, std::uint32_t(data.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const auto crc =
      crc32(0, out.data() + crc_start, uInt(out.size() - crc_start));
  put_u32(out, std::uint32_t(crc));
}

std::vector<std::uint8_t> deflate_all(const std::vector<std::uint8_t>& raw) {
  uLongf bound = compressBound(uLong(raw.size()));
  std::vector<std::uint8_t> out(bound);
  if (compress2(out.data(), &bound, raw.data(), uLong(raw.size()), 6) != Z_OK)
    throw std::runtime_error("png: deflate failed");
  out.resize(bound);
  return out;
}

std::vector<std::uint8_t> png_container(int width, int height, int bit_depth,
                                        int color_type,
                                        const std::vector<std::uint8_t>& scanlines) {
  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, std::uint32_t(width));
  put_u32(ihdr, std::uint32_t(height));
  ihdr.push_back(std::uint8_t(bit_depth));
  ihdr.push_back(std::uint8_t(color_type));
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter
  ihdr.push_back(0);  // interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", deflate_all(scanlines));
  put_chunk(out, "IEND", {});
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_png_rgb8(const std::vector<std::array<std::uint8_t, 3>>& rgb,
                                          int width, int height) {
  std::vector<std::uint8_t> raw;
  raw.reserve(std::size_t(height) * (1 + std::size_t(width) * 3));
  for (int v = 0; v < height; ++v) {
    raw.push_back(0);  // filter: none
    for (int u = 0; u < width; ++u) {
      const auto& px = rgb[std::size_t(v) * width + u];
      raw.insert(raw.end(), px.begin(), px.end());
    }
  }
  return png_container(width, height, 8, 2, raw);
}

std::vector<std::uint8_t> encode_png_gray16(const std::vector<std::uint16_t>& gray,
                                            int width, int height) {
  std::vector<std::uint8_t> raw;
  raw.reserve(std::size_t(height) * (1 + std::size_t(width) * 2));
  for (int v = 0; v < height; ++v) {
    raw.push_back(0);
    for (int u = 0; u < width; ++u) {
      const std::uint16_t g = gray[std::size_t(v) * width + u];
      raw.push_back(std::uint8_t(g >> 8));  // big-endian sample
      raw.push_back(std::uint8_t(g & 0xff));
    }
  }
  return png_container(width, height, 16, 0, raw);
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(alphabet[(n >> 18) & 63]);
    out.push_back(alphabet[(n >> 12) & 63]);
    out.push_back(alphabet[(n >> 6) & 63]);
    out.push_back(alphabet[n & 63]);
  }
  if (i + 1 == bytes.size()) {
    const std::uint32_t n = bytes[i] << 16;
    out.push_back(alphabet[(n >> 18) & 63]);
    out.push_back(alphabet[(n >> 12) & 63]);
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out.push_back(alphabet[(n >> 18) & 63]);
    out.push_back(alphabet[(n >> 12) & 63]);
    out.push_back(alphabet[(n >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

}  // namespace thinkgrasp
