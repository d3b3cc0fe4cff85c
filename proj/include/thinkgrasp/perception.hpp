// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thinkgrasp/cloud.hpp"
#include "thinkgrasp/scene.hpp"

namespace thinkgrasp {

struct CameraModel {
  double fx = 230.0, fy = 230.0;
  double cx = 112.0, cy = 112.0;
  int width = 224, height = 224;
  Mat3 rotation = Mat3::Identity();  // camera-to-world
  Vec3 position = Vec3::Zero();

  Vec3 backproject_cam(double u, double v, double depth) const {
    return {depth * (u - cx) / fx, depth * (v - cy) / fy, depth};
  }
};

/// Overhead camera at 45 degrees elevation looking at the workspace center.
CameraModel default_camera(const Aabb& workspace);

/// World point for a pixel and its camera-frame depth. Throws on depth <= 0.
Vec3 backproject(const CameraModel& cam, double u, double v, double depth);

/// Pixel coordinates (u, v) and camera depth for a world point; nullopt if
/// the point is behind the camera.
std::optional<Vec3> project(const CameraModel& cam, const Vec3& world);

struct Observation {
  CameraModel camera;
  std::vector<std::array<std::uint8_t, 3>> rgb;  // row-major, W*H
  std::vector<double> depth;                     // camera-frame z, 0 = no hit
  std::vector<std::int32_t> pixel_owner;         // object id, -1 = background
  PointCloud cloud;                              // one point per owned pixel

  int width() const { return camera.width; }
  int height() const { return camera.height; }
  std::size_t idx(int u, int v) const {
    return static_cast<std::size_t>(v) * camera.width + u;
  }
};

/// Integer pixel box, min-inclusive / max-exclusive.
struct PixelBox {
  int x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  int width() const { return x2 - x1; }
  int height() const { return y2 - y1; }
  bool contains(int u, int v) const { return u >= x1 && u < x2 && v >= y1 && v < y2; }
  PixelBox union_with(const PixelBox& o) const;
  PixelBox intersect(const PixelBox& o) const;
  bool valid() const { return x1 < x2 && y1 < y2; }
};

struct SegmentMask {
  std::vector<std::uint8_t> pixels;  // W*H bitmask
  PixelBox bbox;                     // tight bounds of `pixels`
  double confidence = 0.0;
  std::string matched_text;
  int width = 0, height = 0;

  bool test(int u, int v) const {
    return pixels[static_cast<std::size_t>(v) * width + u] != 0;
  }
  std::size_t pixel_count() const;
};

/// Analytic z-buffer render of the scene: table plane plus every primitive,
/// nearest hit wins. The cloud holds exactly the object-owned pixels.
Observation render(const Scene& scene, const CameraModel& camera);

/// Pixels owned by `id` when the object is rendered alone (same camera).
std::size_t solo_pixel_count(const Scene& scene, const CameraModel& camera, int id);

/// Visible pixels in the full render over pixels when rendered alone.
/// Throws LookupError when the object projects to zero pixels even alone.
double visible_fraction(const Scene& scene, const CameraModel& camera, int id);

struct SegmentNoise {
  int dilation_px = 0;  // > 0 dilate, < 0 erode
  double confidence_jitter = 0.0;
  std::uint64_t seed = 0;
};

/// Ground-truth-backed text-conditioned segmentation. Query is
/// "[color] category [part]"; one mask per matching visible object or part,
/// sorted by confidence descending. Empty list when nothing matches.
std::vector<SegmentMask> segment_by_text(const Observation& obs, const Scene& scene,
                                         const std::string& query,
                                         const SegmentNoise& noise = {});

/// Cloud points whose source pixels fall inside the box.
/// Throws EmptyCropError when no point qualifies.
PointCloud crop_cloud(const Observation& obs, const PixelBox& region);

/// Cloud points whose source pixels are in the mask.
PointCloud crop_cloud(const Observation& obs, const SegmentMask& mask);

/// Debug export: 8-bit RGB PNG and 16-bit grayscale PNG with millimeter
/// depth. Not load-bearing for the pipeline.
void export_observation_png(const Observation& obs, const std::string& rgb_path,
                            const std::string& depth_path);

}  // namespace thinkgrasp
