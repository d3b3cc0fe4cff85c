// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace thinkgrasp {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Primitive kinds used for every object in a scene.
enum class ShapeKind { Sphere, Box, Cylinder };

/// Primitive with dimensions in meters.
///   Sphere:   dims = {radius}
///   Box:      dims = {size_x, size_y, size_z}  (full extents)
///   Cylinder: dims = {radius, height}          (axis along local z)
struct Shape {
  ShapeKind kind = ShapeKind::Sphere;
  std::vector<double> dims;

  double half_height() const;
  /// Radius of the bounding sphere around the local origin.
  double bounding_radius() const;
  /// Radius of the bounding circle of the xy footprint.
  double footprint_radius() const;
};

/// Position of the primitive's geometric center plus yaw about world z.
struct Pose {
  Vec3 pos = Vec3::Zero();
  double yaw = 0.0;

  Vec3 to_world(const Vec3& local) const;
  Vec3 to_local(const Vec3& world) const;
  Vec3 rotate_to_world(const Vec3& local_dir) const;
  Vec3 rotate_to_local(const Vec3& world_dir) const;
};

/// Axis-aligned box given by center and half extents (object-local frame).
struct LocalBox {
  Vec3 center = Vec3::Zero();
  Vec3 half = Vec3::Zero();

  bool contains(const Vec3& p, double tol = 0.0) const;
};

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
};

/// Ray with arbitrary (not necessarily unit) direction. Intersection
/// parameters t are expressed in units of |dir|, so a caller that uses
/// camera-frame dir = ((u-cx)/fx, (v-cy)/fy, 1) gets t = camera depth.
struct Ray {
  Vec3 origin;
  Vec3 dir;
};

/// First intersection of a ray with a primitive at the given pose.
/// Returns the ray parameter t (> tmin) or nullopt.
std::optional<double> intersect_primitive(const Ray& ray, const Shape& shape,
                                          const Pose& pose, double tmin = 1e-9);

/// Unsigned distance from a point to the primitive's surface (0 on it,
/// positive inside and outside).
double surface_distance(const Vec3& point, const Shape& shape, const Pose& pose);

/// True if the point is strictly inside the primitive.
bool contains_point(const Vec3& point, const Shape& shape, const Pose& pose,
                    double tol = 0.0);

Aabb primitive_aabb(const Shape& shape, const Pose& pose);

// ---------------------------------------------------------------------------
// 2D footprints (used by settling and interpenetration checks; every object
// is an upright primitive, so vertical separation plus footprint overlap
// fully characterises contact).

/// Convex footprint: circle (spheres, cylinders) or yaw-rotated rectangle.
struct Footprint {
  bool is_circle = true;
  Vec2 center = Vec2::Zero();
  double radius = 0.0;                  // circle
  std::array<Vec2, 4> corners{};        // rectangle (CCW)
};

Footprint footprint_of(const Shape& shape, const Pose& pose);

/// Penetration depth of two footprints; <= 0 when disjoint or touching.
double footprint_overlap(const Footprint& a, const Footprint& b);

/// 3D interpenetration depth between two primitives; <= 0 when separated.
/// Exact for sphere pairs and sphere/convex, conservative (z-interval x
/// footprint) for the remaining upright pairs.
double interpenetration(const Shape& sa, const Pose& pa, const Shape& sb,
                        const Pose& pb);

/// Overlap of the two primitives' z intervals; <= 0 when separated.
double interpenetration_z(const Shape& sa, const Pose& pa, const Shape& sb,
                          const Pose& pb);

/// Deterministic sampling of the primitive surface at ~`spacing` meters,
/// in world coordinates. Used by the simulator for grasp attribution and
/// collision queries.
std::vector<Vec3> sample_surface(const Shape& shape, const Pose& pose,
                                 double spacing);

}  // namespace thinkgrasp
