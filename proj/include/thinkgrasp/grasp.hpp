// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "thinkgrasp/cloud.hpp"

namespace thinkgrasp {

struct GripperSpec {
  double max_opening = 0.085;  // ROBOTIQ-85 class two-finger gripper
  double finger_depth = 0.04;
  double finger_thickness = 0.012;
};

/// Two-finger contact pair with outward surface normals.
struct ContactPair {
  Vec3 p1, p2;
  Vec3 n1, n2;
};

struct GraspCandidate {
  Vec3 center;        // midpoint of the contacts
  Vec3 closing_axis;  // unit, (p2 - p1) normalized
  Vec3 approach_axis; // unit, orthogonal to closing_axis
  double width = 0.0;
  ContactPair contacts;
  double score = 0.0;  // in {0.1, ..., 1.0} once set
};

/// Friction-cone test: both fingers can press along the contact line
/// without slipping. u = (p2-p1)/|p2-p1|; requires angle(u, -n1) and
/// angle(-u, -n2) both <= atan(mu).
bool antipodal(const ContactPair& contacts, double mu);

/// tan of the worse of the two contact misalignment angles; infinity when
/// either contact faces away from the closing line.
double contact_misalignment_tan(const ContactPair& contacts);

/// Sweep mu over {1.0, 0.9, ..., 0.1} descending; score = 1.1 - mu_min for
/// the smallest mu that keeps the pair antipodal. Throws NoScoreError when
/// the pair fails even at mu = 1.
double force_closure_score(const ContactPair& contacts);

/// PCA normals from the k nearest neighbors, oriented toward
/// cloud.view_origin. Degenerate neighborhoods leave has_normal unset.
PointCloud estimate_normals(const PointCloud& cloud, int k = 16);

/// Antipodal candidate sampling: each of m draws seeds a random point and
/// pairs it with its best opposing partner within the gripper opening.
/// Every returned candidate is scored. Deterministic in seed.
std::vector<GraspCandidate> sample_candidates(const PointCloud& cloud,
                                              const GripperSpec& gripper, int m,
                                              std::uint64_t seed);

/// True when no point of `others` falls inside the swept finger boxes or
/// the palm box, each inflated by 2 mm clearance.
bool collision_free(const std::vector<Vec3>& others, const GraspCandidate& candidate,
                    const GripperSpec& gripper);

bool collision_free(const PointCloud& others, const GraspCandidate& candidate,
                    const GripperSpec& gripper);

/// Test box set occupied by the gripper at a candidate (local frame axes:
/// closing, approach, closing x approach). Exposed for tests.
struct GripperBoxes {
  Vec3 center;
  Vec3 c_axis, a_axis, t_axis;
  double half_width;  // candidate half width
  double finger_thickness, finger_depth, clearance;

  bool hits(const Vec3& p) const;
};

GripperBoxes gripper_boxes(const GraspCandidate& candidate, const GripperSpec& gripper,
                           double clearance = 0.002);

}  // namespace thinkgrasp
