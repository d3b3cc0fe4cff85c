// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "thinkgrasp/geometry.hpp"

namespace thinkgrasp {

struct PixelRef {
  int u = 0;
  int v = 0;
};

/// Single-view point cloud in world coordinates. `normals` is parallel to
/// `points` once estimate_normals has run; `has_normal[i]` marks points
/// whose neighborhood was non-degenerate.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::vector<std::uint8_t> has_normal;
  std::vector<std::array<std::uint8_t, 3>> colors;
  std::vector<PixelRef> source_pixels;
  Vec3 view_origin = Vec3(0, 0, 1);  // used to orient normals

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  void reserve(std::size_t n) {
    points.reserve(n);
    colors.reserve(n);
    source_pixels.reserve(n);
  }
};

}  // namespace thinkgrasp
