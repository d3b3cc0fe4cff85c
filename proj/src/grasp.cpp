// SPDX-License-Identifier: Apache-2.0
#include "thinkgrasp/grasp.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "thinkgrasp/errors.hpp"

namespace thinkgrasp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinContactSeparation = 1e-4;  // meters

double mu_grid(int k) { return k / 10.0; }

/// tan of the angle between `dir` and `axis` (both nonzero); infinity when
/// the angle reaches or exceeds 90 degrees.
double tan_between(const Vec3& dir, const Vec3& axis) {
  const double dot = dir.dot(axis);
  if (dot <= 0) return kInf;
  return dir.cross(axis).norm() / dot;
}

}  // namespace

double contact_misalignment_tan(const ContactPair& contacts) {
  const Vec3 d = contacts.p2 - contacts.p1;
  const double len = d.norm();
  if (len < kMinContactSeparation)
    throw NoScoreError("contact points coincide");
  const Vec3 u = d / len;
  // finger 1 presses along +u against outward normal n1; finger 2 along -u
  const double t1 = tan_between(u, -contacts.n1);
  const double t2 = tan_between(-u, -contacts.n2);
  return std::max(t1, t2);
}

bool antipodal(const ContactPair& contacts, double mu) {
  if (!(mu > 0)) throw NoScoreError("antipodal: mu must be positive");
  return contact_misalignment_tan(contacts) <= mu;
}

double force_closure_score(const ContactPair& contacts) {
  if (!antipodal(contacts, mu_grid(10)))
    throw NoScoreError("contact pair is not antipodal at mu = 1.0");
  int k_min = 10;
  for (int k = 9; k >= 1; --k) {
    if (!antipodal(contacts, mu_grid(k))) break;
    k_min = k;
  }
  return (11 - k_min) / 10.0;  // s = 1.1 - mu_min on the exact decimal grid
}

// ---------------------------------------------------------------------------
// Normal estimation

PointCloud estimate_normals(const PointCloud& cloud, int k) {
  const std::size_t n = cloud.size();
  if (k < 3) throw LookupError("estimate_normals: k must be >= 3");
  if (n < std::size_t(k)) throw LookupError("estimate_normals: cloud smaller than k");

  PointCloud out = cloud;
  out.normals.assign(n, Vec3::Zero());
  out.has_normal.assign(n, 0);

  std::vector<std::pair<double, std::size_t>> dist(n);
  std::vector<Vec3> nb(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      dist[j] = {(cloud.points[j] - cloud.points[i]).squaredNorm(), j};
    std::nth_element(dist.begin(), dist.begin() + k - 1, dist.end());

    Vec3 mean = Vec3::Zero();
    for (int j = 0; j < k; ++j) {
      nb[std::size_t(j)] = cloud.points[dist[std::size_t(j)].second];
      mean += nb[std::size_t(j)];
    }
    mean /= double(k);
    Mat3 cov = Mat3::Zero();
    for (int j = 0; j < k; ++j) {
      const Vec3 d = nb[std::size_t(j)] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const Vec3 evals = eig.eigenvalues();  // ascending
    // rank < 2 (collinear or coincident neighborhood): no plane fit
    if (evals(1) <= 1e-10 * std::max(evals(2), 1e-30)) continue;
    Vec3 normal = eig.eigenvectors().col(0);
    if (normal.dot(cloud.view_origin - cloud.points[i]) < 0) normal = -normal;
    out.normals[i] = normal.normalized();
    out.has_normal[i] = 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Candidate sampling

namespace {

Vec3 pick_approach_axis(const Vec3& closing, const Vec3& n1, const Vec3& n2) {
  // approach points into the surface pair; project out the closing component
  auto orthogonalize = [&](const Vec3& v) -> std::optional<Vec3> {
    const Vec3 w = v - v.dot(closing) * closing;
    const double len = w.norm();
    if (len < 1e-6) return std::nullopt;
    return Vec3(w / len);
  };
  if (auto a = orthogonalize(-(n1 + n2))) return *a;
  if (auto a = orthogonalize(Vec3(0, 0, -1))) return *a;
  if (auto a = orthogonalize(Vec3(1, 0, 0))) return *a;
  return closing.unitOrthogonal();
}

}  // namespace

std::vector<GraspCandidate> sample_candidates(const PointCloud& cloud,
                                              const GripperSpec& gripper, int m,
                                              std::uint64_t seed) {
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < cloud.has_normal.size(); ++i)
    if (cloud.has_normal[i]) valid.push_back(i);
  if (valid.size() < 2)
    throw LookupError("sample_candidates: need at least 2 points with normals");

  const double cos60 = 0.5;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, valid.size() - 1);

  std::vector<GraspCandidate> out;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (int draw = 0; draw < m; ++draw) {
    const std::size_t i = valid[pick(rng)];
    const Vec3& p1 = cloud.points[i];
    const Vec3& n1 = cloud.normals[i];

    // best opposing partner: smallest worst-side misalignment
    double best_tan = kInf;
    std::size_t best_j = i;
    for (std::size_t j : valid) {
      if (j == i) continue;
      const Vec3 d = cloud.points[j] - p1;
      const double width = d.norm();
      if (width < kMinContactSeparation || width > gripper.max_opening) continue;
      if (n1.dot(-cloud.normals[j]) < cos60) continue;  // normals must oppose
      ContactPair pair{p1, cloud.points[j], n1, cloud.normals[j]};
      double t;
      try {
        t = contact_misalignment_tan(pair);
      } catch (const NoScoreError&) {
        continue;
      }
      if (t < best_tan) {
        best_tan = t;
        best_j = j;
      }
    }
    if (best_j == i || best_tan > mu_grid(10)) continue;  // no antipodal partner
    const auto key = std::minmax(i, best_j);
    if (!seen.insert(key).second) continue;

    GraspCandidate cand;
    cand.contacts = {p1, cloud.points[best_j], n1, cloud.normals[best_j]};
    const Vec3 d = cand.contacts.p2 - cand.contacts.p1;
    cand.width = d.norm();
    cand.closing_axis = d / cand.width;
    cand.approach_axis = pick_approach_axis(cand.closing_axis, n1, cloud.normals[best_j]);
    cand.center = 0.5 * (cand.contacts.p1 + cand.contacts.p2);
    cand.score = force_closure_score(cand.contacts);
    out.push_back(cand);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Collision

GripperBoxes gripper_boxes(const GraspCandidate& candidate, const GripperSpec& gripper,
                           double clearance) {
  GripperBoxes b;
  b.center = candidate.center;
  b.c_axis = candidate.closing_axis;
  b.a_axis = candidate.approach_axis;
  b.t_axis = candidate.closing_axis.cross(candidate.approach_axis);
  b.half_width = 0.5 * candidate.width;
  b.finger_thickness = gripper.finger_thickness;
  b.finger_depth = gripper.finger_depth;
  b.clearance = clearance;
  return b;
}

bool GripperBoxes::hits(const Vec3& p) const {
  const Vec3 d = p - center;
  const double c = d.dot(c_axis);
  const double a = d.dot(a_axis);
  const double t = d.dot(t_axis);
  const double e = clearance;
  if (std::abs(t) > 0.5 * finger_thickness + e) return false;
  // fingers slide along the approach corridor, tips at the contact plane
  if (a >= -finger_depth - e && a <= e) {
    const double ac = std::abs(c);
    if (ac >= half_width - e && ac <= half_width + finger_thickness + e) return true;
  }
  // palm closes the corridor behind the fingers
  if (a >= -finger_depth - finger_thickness - e && a <= -finger_depth + e)
    return std::abs(c) <= half_width + finger_thickness + e;
  return false;
}

bool collision_free(const std::vector<Vec3>& others, const GraspCandidate& candidate,
                    const GripperSpec& gripper) {
  const GripperBoxes boxes = gripper_boxes(candidate, gripper);
  const double reach = candidate.width * 0.5 + gripper.finger_thickness +
                       gripper.finger_depth + gripper.finger_thickness + 0.01;
  for (const auto& p : others) {
    if ((p - candidate.center).squaredNorm() > reach * reach) continue;
    if (boxes.hits(p)) return false;
  }
  return true;
}

bool collision_free(const PointCloud& others, const GraspCandidate& candidate,
                    const GripperSpec& gripper) {
  return collision_free(others.points, candidate, gripper);
}

}  // namespace thinkgrasp
