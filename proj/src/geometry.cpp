// SPDX-License-Identifier: Apache-2.0
#include "thinkgrasp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "thinkgrasp/errors.hpp"

namespace thinkgrasp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double Shape::half_height() const {
  switch (kind) {
    case ShapeKind::Sphere:
      return dims.at(0);
    case ShapeKind::Box:
      return 0.5 * dims.at(2);
    case ShapeKind::Cylinder:
      return 0.5 * dims.at(1);
  }
  return 0.0;
}

double Shape::bounding_radius() const {
  switch (kind) {
    case ShapeKind::Sphere:
      return dims.at(0);
    case ShapeKind::Box:
      return 0.5 * Vec3(dims.at(0), dims.at(1), dims.at(2)).norm();
    case ShapeKind::Cylinder:
      return std::hypot(dims.at(0), 0.5 * dims.at(1));
  }
  return 0.0;
}

double Shape::footprint_radius() const {
  switch (kind) {
    case ShapeKind::Sphere:
      return dims.at(0);
    case ShapeKind::Box:
      return 0.5 * std::hypot(dims.at(0), dims.at(1));
    case ShapeKind::Cylinder:
      return dims.at(0);
  }
  return 0.0;
}

Vec3 Pose::to_world(const Vec3& local) const { return rotate_to_world(local) + pos; }

Vec3 Pose::to_local(const Vec3& world) const { return rotate_to_local(world - pos); }

Vec3 Pose::rotate_to_world(const Vec3& d) const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {c * d.x() - s * d.y(), s * d.x() + c * d.y(), d.z()};
}

Vec3 Pose::rotate_to_local(const Vec3& d) const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
}

bool LocalBox::contains(const Vec3& p, double tol) const {
  return std::abs(p.x() - center.x()) <= half.x() + tol &&
         std::abs(p.y() - center.y()) <= half.y() + tol &&
         std::abs(p.z() - center.z()) <= half.z() + tol;
}

namespace {

std::optional<double> ray_sphere(const Vec3& o, const Vec3& d, double r, double tmin) {
  const double a = d.squaredNorm();
  const double b = 2.0 * o.dot(d);
  const double c = o.squaredNorm() - r * r;
  const double disc = b * b - 4 * a * c;
  if (disc < 0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t0 = (-b - sq) / (2 * a);
  const double t1 = (-b + sq) / (2 * a);
  if (t0 > tmin) return t0;
  if (t1 > tmin) return t1;
  return std::nullopt;
}

std::optional<double> ray_box(const Vec3& o, const Vec3& d, const Vec3& half, double tmin) {
  double t_near = -kInf, t_far = kInf;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (std::abs(o[i]) > half[i]) return std::nullopt;
      continue;
    }
    double t0 = (-half[i] - o[i]) / d[i];
    double t1 = (half[i] - o[i]) / d[i];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::nullopt;
  }
  if (t_near > tmin) return t_near;
  if (t_far > tmin) return t_far;
  return std::nullopt;
}

std::optional<double> ray_cylinder(const Vec3& o, const Vec3& d, double r, double hh,
                                   double tmin) {
  double best = kInf;
  // lateral surface
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a > 1e-15) {
    const double b = 2.0 * (o.x() * d.x() + o.y() * d.y());
    const double c = o.x() * o.x() + o.y() * o.y() - r * r;
    const double disc = b * b - 4 * a * c;
    if (disc >= 0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / (2 * a), (-b + sq) / (2 * a)}) {
        if (t > tmin && t < best && std::abs(o.z() + t * d.z()) <= hh) best = t;
      }
    }
  }
  // caps
  if (std::abs(d.z()) > 1e-15) {
    for (double zc : {-hh, hh}) {
      const double t = (zc - o.z()) / d.z();
      if (t > tmin && t < best) {
        const double x = o.x() + t * d.x(), y = o.y() + t * d.y();
        if (x * x + y * y <= r * r) best = t;
      }
    }
  }
  if (best < kInf) return best;
  return std::nullopt;
}

}  // namespace

std::optional<double> intersect_primitive(const Ray& ray, const Shape& shape,
                                          const Pose& pose, double tmin) {
  const Vec3 o = pose.to_local(ray.origin);
  const Vec3 d = pose.rotate_to_local(ray.dir);
  switch (shape.kind) {
    case ShapeKind::Sphere:
      return ray_sphere(o, d, shape.dims.at(0), tmin);
    case ShapeKind::Box:
      return ray_box(o, d,
                     0.5 * Vec3(shape.dims.at(0), shape.dims.at(1), shape.dims.at(2)),
                     tmin);
    case ShapeKind::Cylinder:
      return ray_cylinder(o, d, shape.dims.at(0), 0.5 * shape.dims.at(1), tmin);
  }
  return std::nullopt;
}

double surface_distance(const Vec3& point, const Shape& shape, const Pose& pose) {
  const Vec3 p = pose.to_local(point);
  switch (shape.kind) {
    case ShapeKind::Sphere:
      return std::abs(p.norm() - shape.dims.at(0));
    case ShapeKind::Box: {
      const Vec3 half = 0.5 * Vec3(shape.dims.at(0), shape.dims.at(1), shape.dims.at(2));
      const Vec3 q = p.cwiseAbs() - half;
      const double outside = q.cwiseMax(0.0).norm();
      const double inside = std::min(0.0, q.maxCoeff());
      return std::abs(outside + inside);
    }
    case ShapeKind::Cylinder: {
      const double r = shape.dims.at(0), hh = 0.5 * shape.dims.at(1);
      const double dr = std::hypot(p.x(), p.y()) - r;
      const double dz = std::abs(p.z()) - hh;
      const double outside = std::hypot(std::max(dr, 0.0), std::max(dz, 0.0));
      const double inside = std::min(0.0, std::max(dr, dz));
      return std::abs(outside + inside);
    }
  }
  return kInf;
}

bool contains_point(const Vec3& point, const Shape& shape, const Pose& pose, double tol) {
  const Vec3 p = pose.to_local(point);
  switch (shape.kind) {
    case ShapeKind::Sphere:
      return p.norm() < shape.dims.at(0) + tol;
    case ShapeKind::Box:
      return std::abs(p.x()) < 0.5 * shape.dims.at(0) + tol &&
             std::abs(p.y()) < 0.5 * shape.dims.at(1) + tol &&
             std::abs(p.z()) < 0.5 * shape.dims.at(2) + tol;
    case ShapeKind::Cylinder:
      return std::hypot(p.x(), p.y()) < shape.dims.at(0) + tol &&
             std::abs(p.z()) < 0.5 * shape.dims.at(1) + tol;
  }
  return false;
}

Aabb primitive_aabb(const Shape& shape, const Pose& pose) {
  Aabb out;
  switch (shape.kind) {
    case ShapeKind::Sphere: {
      const double r = shape.dims.at(0);
      out.min = pose.pos - Vec3(r, r, r);
      out.max = pose.pos + Vec3(r, r, r);
      break;
    }
    case ShapeKind::Box: {
      const double c = std::abs(std::cos(pose.yaw)), s = std::abs(std::sin(pose.yaw));
      const double hx = 0.5 * shape.dims.at(0), hy = 0.5 * shape.dims.at(1);
      const double ex = c * hx + s * hy, ey = s * hx + c * hy;
      const double hz = 0.5 * shape.dims.at(2);
      out.min = pose.pos - Vec3(ex, ey, hz);
      out.max = pose.pos + Vec3(ex, ey, hz);
      break;
    }
    case ShapeKind::Cylinder: {
      const double r = shape.dims.at(0), hh = 0.5 * shape.dims.at(1);
      out.min = pose.pos - Vec3(r, r, hh);
      out.max = pose.pos + Vec3(r, r, hh);
      break;
    }
  }
  return out;
}

Footprint footprint_of(const Shape& shape, const Pose& pose) {
  Footprint f;
  f.center = Vec2(pose.pos.x(), pose.pos.y());
  if (shape.kind == ShapeKind::Box) {
    f.is_circle = false;
    const double hx = 0.5 * shape.dims.at(0), hy = 0.5 * shape.dims.at(1);
    const double c = std::cos(pose.yaw), s = std::sin(pose.yaw);
    const Vec2 ex(c * hx, s * hx), ey(-s * hy, c * hy);
    f.corners = {f.center + ex + ey, f.center - ex + ey, f.center - ex - ey,
                 f.center + ex - ey};
  } else {
    f.is_circle = true;
    f.radius = shape.footprint_radius();
  }
  return f;
}

namespace {

// Penetration of two convex 2D shapes along a set of candidate axes (SAT).
// Returns min over axes of interval overlap; <= 0 means separated.
double rect_axes_overlap(const Footprint& a, const Footprint& b) {
  std::vector<Vec2> axes;
  auto add_rect_axes = [&](const Footprint& r) {
    for (int i = 0; i < 4; ++i) {
      Vec2 e = r.corners[(i + 1) % 4] - r.corners[i];
      const double n = e.norm();
      if (n > 1e-12) axes.push_back(Vec2(-e.y(), e.x()) / n);
    }
  };
  auto add_circle_axes = [&](const Footprint& c, const Footprint& other) {
    // circle vs polygon: axis through circle center and closest corner,
    // plus the polygon edge normals added by the polygon itself.
    double best = kInf;
    Vec2 best_axis(1, 0);
    for (const auto& corner : other.corners) {
      const Vec2 d = corner - c.center;
      const double n = d.norm();
      if (n < best && n > 1e-12) {
        best = n;
        best_axis = d / n;
      }
    }
    axes.push_back(best_axis);
  };
  if (a.is_circle && b.is_circle) {
    const double d = (a.center - b.center).norm();
    return a.radius + b.radius - d;
  }
  if (!a.is_circle) add_rect_axes(a);
  if (!b.is_circle) add_rect_axes(b);
  if (a.is_circle) add_circle_axes(a, b);
  if (b.is_circle) add_circle_axes(b, a);

  auto project = [](const Footprint& f, const Vec2& axis, double& lo, double& hi) {
    if (f.is_circle) {
      const double c = f.center.dot(axis);
      lo = c - f.radius;
      hi = c + f.radius;
    } else {
      lo = kInf;
      hi = -kInf;
      for (const auto& p : f.corners) {
        const double v = p.dot(axis);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  };

  double depth = kInf;
  for (const auto& axis : axes) {
    double alo, ahi, blo, bhi;
    project(a, axis, alo, ahi);
    project(b, axis, blo, bhi);
    depth = std::min(depth, std::min(ahi, bhi) - std::max(alo, blo));
    if (depth <= 0) return depth;
  }
  return depth;
}

}  // namespace

double footprint_overlap(const Footprint& a, const Footprint& b) {
  return rect_axes_overlap(a, b);
}

double interpenetration(const Shape& sa, const Pose& pa, const Shape& sb,
                        const Pose& pb) {
  if (sa.kind == ShapeKind::Sphere && sb.kind == ShapeKind::Sphere) {
    return sa.dims.at(0) + sb.dims.at(0) - (pa.pos - pb.pos).norm();
  }
  if (sa.kind == ShapeKind::Sphere || sb.kind == ShapeKind::Sphere) {
    const bool a_is_sphere = sa.kind == ShapeKind::Sphere;
    const Shape& sph = a_is_sphere ? sa : sb;
    const Pose& sph_pose = a_is_sphere ? pa : pb;
    const Shape& other = a_is_sphere ? sb : sa;
    const Pose& other_pose = a_is_sphere ? pb : pa;
    const double r = sph.dims.at(0);
    if (contains_point(sph_pose.pos, other, other_pose))
      return r + surface_distance(sph_pose.pos, other, other_pose);
    return r - surface_distance(sph_pose.pos, other, other_pose);
  }
  // upright box/cylinder pair: separate along z then in the plane
  const double za = interpenetration_z(sa, pa, sb, pb);
  if (za <= 0) return za;
  const double xy = footprint_overlap(footprint_of(sa, pa), footprint_of(sb, pb));
  return std::min(za, xy);
}

double interpenetration_z(const Shape& sa, const Pose& pa, const Shape& sb,
                          const Pose& pb) {
  const double a_lo = pa.pos.z() - sa.half_height(), a_hi = pa.pos.z() + sa.half_height();
  const double b_lo = pb.pos.z() - sb.half_height(), b_hi = pb.pos.z() + sb.half_height();
  return std::min(a_hi, b_hi) - std::max(a_lo, b_lo);
}

std::vector<Vec3> sample_surface(const Shape& shape, const Pose& pose, double spacing) {
  std::vector<Vec3> out;
  auto push = [&](double x, double y, double z) { out.push_back(pose.to_world({x, y, z})); };
  switch (shape.kind) {
    case ShapeKind::Sphere: {
      const double r = shape.dims.at(0);
      const int n_theta = std::max(4, int(std::ceil(M_PI * r / spacing)));
      for (int i = 0; i <= n_theta; ++i) {
        const double theta = M_PI * i / n_theta;
        const double ring_r = r * std::sin(theta);
        const int n_phi = std::max(1, int(std::ceil(2 * M_PI * ring_r / spacing)));
        for (int j = 0; j < n_phi; ++j) {
          const double phi = 2 * M_PI * j / n_phi;
          push(ring_r * std::cos(phi), ring_r * std::sin(phi), r * std::cos(theta));
        }
      }
      break;
    }
    case ShapeKind::Box: {
      const Vec3 half = 0.5 * Vec3(shape.dims.at(0), shape.dims.at(1), shape.dims.at(2));
      auto face = [&](int fixed, double sign) {
        const int u = (fixed + 1) % 3, v = (fixed + 2) % 3;
        const int nu = std::max(2, int(std::ceil(2 * half[u] / spacing)) + 1);
        const int nv = std::max(2, int(std::ceil(2 * half[v] / spacing)) + 1);
        for (int i = 0; i < nu; ++i)
          for (int j = 0; j < nv; ++j) {
            Vec3 p;
            p[fixed] = sign * half[fixed];
            p[u] = -half[u] + 2 * half[u] * i / (nu - 1);
            p[v] = -half[v] + 2 * half[v] * j / (nv - 1);
            push(p.x(), p.y(), p.z());
          }
      };
      for (int axis = 0; axis < 3; ++axis) {
        face(axis, -1.0);
        face(axis, 1.0);
      }
      break;
    }
    case ShapeKind::Cylinder: {
      const double r = shape.dims.at(0), hh = 0.5 * shape.dims.at(1);
      const int n_phi = std::max(6, int(std::ceil(2 * M_PI * r / spacing)));
      const int n_z = std::max(2, int(std::ceil(2 * hh / spacing)) + 1);
      for (int i = 0; i < n_phi; ++i) {
        const double phi = 2 * M_PI * i / n_phi;
        for (int j = 0; j < n_z; ++j)
          push(r * std::cos(phi), r * std::sin(phi), -hh + 2 * hh * j / (n_z - 1));
      }
      const int n_r = std::max(1, int(std::ceil(r / spacing)));
      for (int i = 1; i <= n_r; ++i) {
        const double rr = r * i / n_r;
        const int n = std::max(4, int(std::ceil(2 * M_PI * rr / spacing)));
        for (int j = 0; j < n; ++j) {
          const double phi = 2 * M_PI * j / n;
          push(rr * std::cos(phi), rr * std::sin(phi), hh);
          push(rr * std::cos(phi), rr * std::sin(phi), -hh);
        }
      }
      push(0, 0, hh);
      push(0, 0, -hh);
      break;
    }
  }
  return out;
}

}  // namespace thinkgrasp
