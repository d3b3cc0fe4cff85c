// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace thinkgrasp {

/// Minimal zlib-backed PNG writers (debug exports and the remote-selector
/// image payload). No reader; nothing in the pipeline loads PNGs back.
std::vector<std::uint8_t> encode_png_rgb8(const std::vector<std::array<std::uint8_t, 3>>& rgb,
                                          int width, int height);
std::vector<std::uint8_t> encode_png_gray16(const std::vector<std::uint16_t>& gray,
                                            int width, int height);

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);

}  // namespace thinkgrasp
