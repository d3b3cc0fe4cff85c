// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thinkgrasp/geometry.hpp"

namespace thinkgrasp {

/// Named sub-volume of a primitive (e.g. a knife handle), in the object's
/// local frame. Must be contained in the parent primitive's volume.
struct ObjectPart {
  std::string name;
  LocalBox box;
};

struct ObjectInstance {
  int id = 0;
  std::string category;
  std::string color;  // one of the 12 palette names
  Shape shape;
  Pose pose;
  std::vector<ObjectPart> parts;

  double base_z() const { return pose.pos.z() - shape.half_height(); }
  double top_z() const { return pose.pos.z() + shape.half_height(); }
};

struct Scene {
  std::vector<ObjectInstance> objects;
  Aabb workspace{{-0.25, -0.25, 0.0}, {0.25, 0.25, 0.4}};
  std::uint64_t seed = 0;

  const ObjectInstance* find(int id) const;
};

/// Exact field-for-field comparison (used by round-trip tests).
bool scenes_equal(const Scene& a, const Scene& b);

struct GoalSpec {
  std::string instruction;
  std::vector<std::string> goal_categories;  // non-empty

  bool matches(const std::string& category) const;
};

enum class FailureReason { None, Collision, LowQuality, EmptyGrip, Stochastic };

struct GraspOutcome {
  std::optional<int> grasped_id;
  bool success = false;
  FailureReason failure_reason = FailureReason::None;
};

std::string to_string(FailureReason r);

// ---------------------------------------------------------------------------
// Vocabulary

/// Fixed 12-color palette; "color and name" strings are built from these.
const std::vector<std::string>& color_palette();
bool is_palette_color(const std::string& name);

/// Per-category shape archetype used by the scene generator.
struct CategorySpec {
  std::string name;
  ShapeKind kind;
  Vec3 dims_min;  // unused components zero
  Vec3 dims_max;
  bool graspable_single_view;  // spheres/cylinders expose opposing contacts
  bool has_handle_part;        // declares a "handle" sub-volume (knife)
};

const std::vector<CategorySpec>& category_vocabulary();
const CategorySpec* find_category(const std::string& name);

/// Map a free-text instruction onto goal categories via keyword matching.
/// Throws LookupError when nothing in the vocabulary matches.
GoalSpec goal_from_instruction(const std::string& instruction);

// ---------------------------------------------------------------------------
// Operations

enum class ClutterLevel { Light, Heavy };
enum class GoalVisibility { Visible, Occluded, Buried };

struct SceneConfig {
  int n_objects = 5;
  ClutterLevel clutter_level = ClutterLevel::Light;
  std::string goal_category = "pear";
  GoalVisibility goal_visibility = GoalVisibility::Visible;
};

/// Procedural clutter generation. Deterministic in (config, seed); the
/// returned scene contains exactly one goal-category object and satisfies
/// the requested goal visibility under the default camera.
Scene generate_scene(const SceneConfig& config, std::uint64_t seed);

/// Scene with the object removed; everything else untouched (no settling).
Scene remove_object(const Scene& scene, int id);

/// Drop unsupported objects straight down onto the highest surface beneath
/// their footprint. Idempotent; never changes xy coordinates.
Scene settle(const Scene& scene);

/// Validate all Scene invariants; throws FileFormatError with a description
/// of the first violation.
void validate_scene(const Scene& scene);

struct ExecuteNoise {
  double failure_prob = 0.0;
  std::uint64_t seed = 0;
};

struct GripperSpec;      // grasp.hpp
struct GraspCandidate;   // grasp.hpp

/// Simulate closing the gripper at the candidate pose. On success the
/// grasped object is removed from `scene` and the scene is settled.
GraspOutcome execute_grasp(Scene& scene, const GraspCandidate& candidate,
                           const GripperSpec& gripper,
                           const ExecuteNoise& noise = {},
                           double quality_threshold = 0.4);

bool goal_satisfied(const GraspOutcome& outcome, const GoalSpec& goal,
                    const Scene& scene_before_grasp);

}  // namespace thinkgrasp
