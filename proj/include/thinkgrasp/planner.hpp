// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thinkgrasp/grasp.hpp"
#include "thinkgrasp/selector.hpp"

namespace thinkgrasp {

/// 3x3 grid cell, row-major: 1 top-left .. 9 bottom-right.
struct GridCell {
  int index = 5;

  GridCell() = default;
  explicit GridCell(int i);
  int row() const { return (index - 1) / 3; }
  int col() const { return (index - 1) % 3; }
};

/// Center pixel of the cell within the box. Throws on a degenerate box.
Vec2 cell_center(const PixelBox& bbox, GridCell cell);

/// Inverse of cell_center's partition; floor semantics, right/bottom edge
/// clamped. Throws when the pixel lies outside the box.
GridCell cell_of(const PixelBox& bbox, const Vec2& pixel);

/// Back-projected 3D target for the preferred cell of the mask's box.
/// Falls back to the nearest mask pixel with depth when the cell center
/// carries none. no_grid uses the box center (identical to cell 5).
Vec3 target_point_3d(const Observation& obs, const SegmentMask& mask, GridCell cell,
                     bool no_grid = false);

/// Among the k candidates closest to the target, the one with the highest
/// score. Ties: smaller distance, then smaller index. Deterministic.
GraspCandidate select_grasp(const std::vector<GraspCandidate>& candidates,
                            const Vec3& target, int k);

enum class SelectorKind { Scripted, Remote, Random };

enum class Provenance { PartSegmenter, ObjectSegmenterFallback, ScriptedFallback };
std::string to_string(Provenance p);
std::string to_string(SelectorKind k);

struct Ablation {
  bool no_grid = false;
  bool crop_only = false;
  bool no_selector = false;
};

struct EpisodeConfig {
  int max_steps = 15;  // 50 for heavy clutter
  int top_k = 10;
  SelectorKind selector_kind = SelectorKind::Scripted;
  Ablation ablation;
  std::string endpoint;  // remote selector URL
  RemotePolicy remote_policy;
  GripperSpec gripper;
  int sample_budget = 500;
  double grasp_quality_threshold = 0.4;
  double failure_prob = 0.0;     // execute-time stochastic failures
  SegmentNoise segment_noise{};  // oracle segmenter noise
  ScriptedParams scripted{};
};

struct PlannedAction {
  std::string target_label;
  SegmentMask mask;
  Vec3 target_point;
  GraspCandidate candidate;
  Provenance provenance = Provenance::ObjectSegmenterFallback;
};

using SelectionHistory = std::vector<std::pair<std::string, std::string>>;

/// One decision step: select, segment (part -> object fallback), crop,
/// sample + score + collision-filter, pick the pose. Throws StepSkipError
/// when every stage comes up empty.
PlannedAction plan_step(const Scene& scene, const Observation& obs, const GoalSpec& goal,
                        const EpisodeConfig& config, int step_index,
                        std::uint64_t step_seed, const SelectionHistory& history = {});

struct StepRecord {
  int step = 0;
  std::string selected_label;
  std::string provenance;
  double score = 0.0;
  std::string outcome;  // "success", failure reason, or "skip"
};

struct EpisodeResult {
  bool success = false;
  int motions = 0;
  std::vector<StepRecord> trace;
  std::uint64_t seed = 0;
  std::string config_id;
};

/// Closed loop: render, plan, execute, settle, re-check until the goal is
/// grasped or the motion budget is exhausted. Every attempt (including a
/// skipped step) costs one motion.
EpisodeResult run_episode(Scene scene, const GoalSpec& goal, const EpisodeConfig& config,
                          std::uint64_t seed);

}  // namespace thinkgrasp
