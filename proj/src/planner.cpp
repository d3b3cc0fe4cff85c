// SPDX-License-Identifier: Apache-2.0
#include "thinkgrasp/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "thinkgrasp/errors.hpp"

namespace thinkgrasp {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

GridCell::GridCell(int i) : index(i) {
  if (i < 1 || i > 9) throw LookupError("grid cell index out of range: " + std::to_string(i));
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::PartSegmenter: return "part_segmenter";
    case Provenance::ObjectSegmenterFallback: return "object_segmenter_fallback";
    case Provenance::ScriptedFallback: return "scripted_fallback";
  }
  return "object_segmenter_fallback";
}

std::string to_string(SelectorKind k) {
  switch (k) {
    case SelectorKind::Scripted: return "scripted";
    case SelectorKind::Remote: return "remote";
    case SelectorKind::Random: return "random";
  }
  return "scripted";
}

Vec2 cell_center(const PixelBox& bbox, GridCell cell) {
  if (!bbox.valid()) throw LookupError("cell_center: degenerate bbox");
  const double w = (bbox.x2 - bbox.x1) / 3.0;
  const double h = (bbox.y2 - bbox.y1) / 3.0;
  return Vec2(bbox.x1 + (cell.col() + 0.5) * w, bbox.y1 + (cell.row() + 0.5) * h);
}

GridCell cell_of(const PixelBox& bbox, const Vec2& pixel) {
  if (!bbox.valid()) throw LookupError("cell_of: degenerate bbox");
  if (pixel.x() < bbox.x1 || pixel.x() > bbox.x2 || pixel.y() < bbox.y1 ||
      pixel.y() > bbox.y2)
    throw LookupError("cell_of: pixel outside bbox");
  const double w = (bbox.x2 - bbox.x1) / 3.0;
  const double h = (bbox.y2 - bbox.y1) / 3.0;
  const int col = std::min(2, int(std::floor((pixel.x() - bbox.x1) / w)));
  const int row = std::min(2, int(std::floor((pixel.y() - bbox.y1) / h)));
  return GridCell(row * 3 + col + 1);
}

Vec3 target_point_3d(const Observation& obs, const SegmentMask& mask, GridCell cell,
                     bool no_grid) {
  if (!mask.bbox.valid()) throw EmptyCropError("target_point_3d: empty mask");
  const GridCell effective = no_grid ? GridCell(5) : cell;
  const Vec2 center = cell_center(mask.bbox, effective);
  const int cu = std::clamp(int(std::lround(center.x())), mask.bbox.x1, mask.bbox.x2 - 1);
  const int cv = std::clamp(int(std::lround(center.y())), mask.bbox.y1, mask.bbox.y2 - 1);
  if (mask.test(cu, cv) && obs.depth[obs.idx(cu, cv)] > 0)
    return backproject(obs.camera, cu, cv, obs.depth[obs.idx(cu, cv)]);

  // nearest mask pixel carrying depth; ties by smaller row-major index
  double best_d2 = std::numeric_limits<double>::infinity();
  int best_u = -1, best_v = -1;
  for (int v = mask.bbox.y1; v < mask.bbox.y2; ++v)
    for (int u = mask.bbox.x1; u < mask.bbox.x2; ++u) {
      if (!mask.test(u, v) || obs.depth[obs.idx(u, v)] <= 0) continue;
      const double d2 = (Vec2(u, v) - center).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best_u = u;
        best_v = v;
      }
    }
  if (best_u < 0) throw EmptyCropError("target_point_3d: mask has no depth pixels");
  return backproject(obs.camera, best_u, best_v, obs.depth[obs.idx(best_u, best_v)]);
}

GraspCandidate select_grasp(const std::vector<GraspCandidate>& candidates,
                            const Vec3& target, int k) {
  if (candidates.empty()) throw LookupError("select_grasp: empty candidate list");
  if (k < 1) throw LookupError("select_grasp: k must be >= 1");

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> dist(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i)
    dist[i] = (candidates[i].center - target).norm();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return a < b;
  });

  const std::size_t top = std::min<std::size_t>(std::size_t(k), order.size());
  std::size_t best = order[0];
  for (std::size_t i = 1; i < top; ++i) {
    const std::size_t c = order[i];
    if (candidates[c].score > candidates[best].score)
      best = c;
    else if (candidates[c].score == candidates[best].score) {
      if (dist[c] < dist[best] || (dist[c] == dist[best] && c < best)) best = c;
    }
  }
  return candidates[best];
}

namespace {

/// "green bottle neck" -> "green bottle": drop the trailing part word.
std::string object_query_of(const std::string& selected) {
  const auto space = selected.rfind(' ');
  if (space == std::string::npos) return selected;
  return selected.substr(0, space);
}

}  // namespace

PlannedAction plan_step(const Scene& scene, const Observation& obs, const GoalSpec& goal,
                        const EpisodeConfig& config, int step_index,
                        std::uint64_t step_seed, const SelectionHistory& history) {
  // 1. selection
  SelectorResponse resp;
  bool scripted_fallback = false;
  if (config.ablation.no_selector) {
    ScriptedParams params = config.scripted;
    params.goal_only = true;
    resp = scripted_select(obs, goal, scene, params);
  } else {
    switch (config.selector_kind) {
      case SelectorKind::Scripted:
        resp = scripted_select(obs, goal, scene, config.scripted);
        break;
      case SelectorKind::Random:
        resp = random_select(obs, scene, step_seed);
        break;
      case SelectorKind::Remote: {
        SelectorRequest request;
        request.rgb = obs.rgb;
        request.width = obs.width();
        request.height = obs.height();
        request.instruction = goal.instruction;
        request.step_index = step_index;
        request.history = history;
        auto remote = remote_select(request, config.endpoint, config.remote_policy);
        if (remote) {
          resp = *remote;
        } else {
          resp = scripted_select(obs, goal, scene, config.scripted);
          scripted_fallback = true;
        }
        break;
      }
    }
  }

  // 2. segmentation, part query first, object query as fallback
  Provenance provenance = Provenance::ObjectSegmenterFallback;
  std::vector<SegmentMask> masks;
  if (resp.kind == SelectionKind::Part) {
    masks = segment_by_text(obs, scene, resp.selected, config.segment_noise);
    if (!masks.empty()) provenance = Provenance::PartSegmenter;
  }
  if (masks.empty()) {
    const std::string query = resp.kind == SelectionKind::Part
                                  ? object_query_of(resp.selected)
                                  : resp.selected;
    masks = segment_by_text(obs, scene, query, config.segment_noise);
    provenance = Provenance::ObjectSegmenterFallback;
  }
  if (masks.empty())
    throw StepSkipError("no segmentation mask for '" + resp.selected + "'");
  if (scripted_fallback) provenance = Provenance::ScriptedFallback;

  // 3. highest segmentation confidence wins
  const SegmentMask& mask = masks.front();

  // 4. crop region
  const PixelBox image{0, 0, obs.width(), obs.height()};
  const PixelBox region = config.ablation.crop_only
                              ? resp.crop_box.intersect(image)
                              : mask.bbox.union_with(resp.crop_box).intersect(image);
  PointCloud crop;
  try {
    crop = crop_cloud(obs, region);
  } catch (const EmptyCropError& e) {
    throw StepSkipError(std::string("empty crop: ") + e.what());
  }

  // 5. normals, candidates, collision filter
  if (crop.size() < 8) throw StepSkipError("crop too small for normal estimation");
  const int k = std::min<int>(16, int(crop.size()));
  PointCloud with_normals;
  std::vector<GraspCandidate> candidates;
  try {
    with_normals = estimate_normals(crop, k);
    candidates = sample_candidates(with_normals, config.gripper, config.sample_budget,
                                   step_seed);
  } catch (const Error& e) {
    throw StepSkipError(std::string("candidate generation failed: ") + e.what());
  }
  if (candidates.empty()) throw StepSkipError("no antipodal candidate in the crop");

  PointCloud obstacles;
  obstacles.view_origin = obs.cloud.view_origin;
  for (std::size_t i = 0; i < obs.cloud.size(); ++i) {
    const auto px = obs.cloud.source_pixels[i];
    if (mask.test(px.u, px.v)) continue;
    obstacles.points.push_back(obs.cloud.points[i]);
  }
  std::vector<GraspCandidate> safe;
  for (const auto& c : candidates)
    if (collision_free(obstacles, c, config.gripper)) safe.push_back(c);
  if (safe.empty()) throw StepSkipError("all candidates collide");

  // 6. target point from the preferred cell, then the pose
  GridCell cell;
  try {
    cell = GridCell(resp.selected_property().preferred_location);
  } catch (const ParseError&) {
    cell = GridCell(5);
  }
  Vec3 target;
  try {
    target = target_point_3d(obs, mask, cell, config.ablation.no_grid);
  } catch (const EmptyCropError& e) {
    throw StepSkipError(std::string("no target point: ") + e.what());
  }

  PlannedAction action;
  action.target_label = resp.selected;
  action.mask = mask;
  action.target_point = target;
  action.candidate = select_grasp(safe, target, config.top_k);
  action.provenance = provenance;
  return action;
}

EpisodeResult run_episode(Scene scene, const GoalSpec& goal, const EpisodeConfig& config,
                          std::uint64_t seed) {
  EpisodeResult result;
  result.seed = seed;
  const CameraModel camera = default_camera(scene.workspace);
  SelectionHistory history;

  for (int step = 0; step < config.max_steps; ++step) {
    const std::uint64_t step_seed = mix_seed(seed, std::uint64_t(step));
    const Observation obs = render(scene, camera);

    StepRecord record;
    record.step = step;
    PlannedAction action;
    bool planned = false;
    try {
      action = plan_step(scene, obs, goal, config, step, step_seed, history);
      planned = true;
    } catch (const Error&) {
      record.outcome = "skip";
      result.motions++;
      result.trace.push_back(record);
      continue;
    }

    record.selected_label = action.target_label;
    record.provenance = to_string(action.provenance);
    record.score = action.candidate.score;

    const Scene before = scene;
    GraspOutcome outcome;
    try {
      outcome = execute_grasp(scene, action.candidate, config.gripper,
                              {config.failure_prob, mix_seed(step_seed, 0x5eedULL)},
                              config.grasp_quality_threshold);
      record.outcome = outcome.success ? "success" : to_string(outcome.failure_reason);
    } catch (const Error&) {
      record.outcome = "skip";
    }
    result.motions++;
    result.trace.push_back(record);
    history.emplace_back(record.selected_label, record.outcome);

    if (goal_satisfied(outcome, goal, before)) {
      result.success = true;
      break;
    }
    (void)planned;
  }
  return result;
}

}  // namespace thinkgrasp
