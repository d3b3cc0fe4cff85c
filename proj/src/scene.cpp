// SPDX-License-Identifier: Apache-2.0
#include "thinkgrasp/scene.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "thinkgrasp/errors.hpp"
#include "thinkgrasp/grasp.hpp"
#include "thinkgrasp/perception.hpp"

namespace thinkgrasp {

namespace {
constexpr double kPenetrationTol = 1e-3;  // 1 mm
constexpr double kSupportTol = 1e-6;
constexpr double kContactTol = 2e-3;  // contacts must lie on a surface within 2 mm
}  // namespace

const ObjectInstance* Scene::find(int id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

bool scenes_equal(const Scene& a, const Scene& b) {
  auto vec_eq = [](const Vec3& x, const Vec3& y) {
    return x.x() == y.x() && x.y() == y.y() && x.z() == y.z();
  };
  if (a.seed != b.seed || a.objects.size() != b.objects.size()) return false;
  if (!vec_eq(a.workspace.min, b.workspace.min) || !vec_eq(a.workspace.max, b.workspace.max))
    return false;
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    const auto& x = a.objects[i];
    const auto& y = b.objects[i];
    if (x.id != y.id || x.category != y.category || x.color != y.color ||
        x.shape.kind != y.shape.kind || x.shape.dims != y.shape.dims ||
        !vec_eq(x.pose.pos, y.pose.pos) || x.pose.yaw != y.pose.yaw ||
        x.parts.size() != y.parts.size())
      return false;
    for (std::size_t j = 0; j < x.parts.size(); ++j) {
      if (x.parts[j].name != y.parts[j].name ||
          !vec_eq(x.parts[j].box.center, y.parts[j].box.center) ||
          !vec_eq(x.parts[j].box.half, y.parts[j].box.half))
        return false;
    }
  }
  return true;
}

bool GoalSpec::matches(const std::string& category) const {
  return std::find(goal_categories.begin(), goal_categories.end(), category) !=
         goal_categories.end();
}

std::string to_string(FailureReason r) {
  switch (r) {
    case FailureReason::None: return "none";
    case FailureReason::Collision: return "collision";
    case FailureReason::LowQuality: return "low_quality";
    case FailureReason::EmptyGrip: return "empty_grip";
    case FailureReason::Stochastic: return "stochastic";
  }
  return "none";
}

// ---------------------------------------------------------------------------
// Vocabulary

const std::vector<std::string>& color_palette() {
  static const std::vector<std::string> palette = {
      "red",  "green", "blue",  "yellow", "orange", "purple",
      "pink", "brown", "black", "white",  "gray",   "cyan"};
  return palette;
}

bool is_palette_color(const std::string& name) {
  const auto& p = color_palette();
  return std::find(p.begin(), p.end(), name) != p.end();
}

const std::vector<CategorySpec>& category_vocabulary() {
  // dims: sphere {r}, box {sx, sy, sz}, cylinder {r, h}
  static const std::vector<CategorySpec> vocab = {
      {"ball", ShapeKind::Sphere, {0.022, 0, 0}, {0.034, 0, 0}, true, false},
      {"pear", ShapeKind::Sphere, {0.024, 0, 0}, {0.032, 0, 0}, true, false},
      {"mango", ShapeKind::Sphere, {0.028, 0, 0}, {0.038, 0, 0}, true, false},
      {"apple", ShapeKind::Sphere, {0.030, 0, 0}, {0.040, 0, 0}, true, false},
      {"bottle", ShapeKind::Cylinder, {0.024, 0.120, 0}, {0.030, 0.160, 0}, true, false},
      {"can", ShapeKind::Cylinder, {0.026, 0.080, 0}, {0.033, 0.115, 0}, true, false},
      {"cup", ShapeKind::Cylinder, {0.032, 0.050, 0}, {0.038, 0.080, 0}, true, false},
      {"mug", ShapeKind::Cylinder, {0.034, 0.060, 0}, {0.040, 0.090, 0}, true, false},
      {"plate", ShapeKind::Cylinder, {0.070, 0.012, 0}, {0.090, 0.018, 0}, false, false},
      {"box", ShapeKind::Box, {0.050, 0.050, 0.030}, {0.100, 0.100, 0.070}, false, false},
      {"sponge", ShapeKind::Box, {0.055, 0.040, 0.018}, {0.080, 0.060, 0.030}, false, false},
      {"banana", ShapeKind::Box, {0.110, 0.022, 0.018}, {0.140, 0.030, 0.025}, false, false},
      {"knife", ShapeKind::Box, {0.170, 0.014, 0.008}, {0.200, 0.018, 0.012}, false, true},
  };
  return vocab;
}

const CategorySpec* find_category(const std::string& name) {
  for (const auto& c : category_vocabulary())
    if (c.name == name) return &c;
  return nullptr;
}

GoalSpec goal_from_instruction(const std::string& instruction) {
  if (instruction.empty()) throw LookupError("empty instruction");
  std::string lower;
  lower.reserve(instruction.size());
  for (char ch : instruction)
    lower.push_back(char(std::tolower(static_cast<unsigned char>(ch))));

  auto has_word = [&](const std::string& w) {
    std::size_t at = 0;
    while ((at = lower.find(w, at)) != std::string::npos) {
      const bool left_ok =
          at == 0 || !std::isalpha(static_cast<unsigned char>(lower[at - 1]));
      const std::size_t end = at + w.size();
      const bool right_ok =
          end >= lower.size() || !std::isalpha(static_cast<unsigned char>(lower[end]));
      if (left_ok && right_ok) return true;
      ++at;
    }
    return false;
  };

  GoalSpec goal;
  goal.instruction = instruction;
  for (const auto& c : category_vocabulary())
    if (has_word(c.name)) goal.goal_categories.push_back(c.name);
  if (goal.goal_categories.empty()) {
    struct Synonym {
      const char* key;
      std::vector<std::string> categories;
    };
    static const std::vector<Synonym> synonyms = {
        {"fruit", {"pear", "mango", "apple"}},
        {"eat", {"pear", "mango", "apple"}},
        {"round", {"ball"}},
        {"drink", {"bottle", "can"}},
        {"cut", {"knife"}},
        {"hold", {"cup", "mug", "box"}},
    };
    for (const auto& s : synonyms)
      if (has_word(s.key)) {
        goal.goal_categories = s.categories;
        break;
      }
  }
  if (goal.goal_categories.empty())
    throw LookupError("no category in the vocabulary matches instruction: " + instruction);
  return goal;
}

// ---------------------------------------------------------------------------
// Validation

void validate_scene(const Scene& scene) {
  std::vector<int> ids;
  for (const auto& o : scene.objects) {
    ids.push_back(o.id);
    const std::size_t want =
        o.shape.kind == ShapeKind::Sphere ? 1 : o.shape.kind == ShapeKind::Box ? 3 : 2;
    if (o.shape.dims.size() != want)
      throw FileFormatError("object " + std::to_string(o.id) + ": wrong dims count");
    for (double d : o.shape.dims)
      if (!(d > 0))
        throw FileFormatError("object " + std::to_string(o.id) + ": non-positive dimension");
    const auto& ws = scene.workspace;
    if (o.pose.pos.x() < ws.min.x() || o.pose.pos.x() > ws.max.x() ||
        o.pose.pos.y() < ws.min.y() || o.pose.pos.y() > ws.max.y() ||
        o.pose.pos.z() < ws.min.z() || o.pose.pos.z() > ws.max.z())
      throw FileFormatError("object " + std::to_string(o.id) + ": outside workspace");
    for (const auto& part : o.parts) {
      for (int corner = 0; corner < 8; ++corner) {
        const Vec3 p = part.box.center + Vec3((corner & 1 ? 1 : -1) * part.box.half.x(),
                                              (corner & 2 ? 1 : -1) * part.box.half.y(),
                                              (corner & 4 ? 1 : -1) * part.box.half.z());
        if (!contains_point(p, o.shape, Pose{}, 1e-6))
          throw FileFormatError("object " + std::to_string(o.id) + ": part '" + part.name +
                                "' leaves the primitive");
      }
    }
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw FileFormatError("duplicate object ids");

  for (std::size_t i = 0; i < scene.objects.size(); ++i)
    for (std::size_t j = i + 1; j < scene.objects.size(); ++j) {
      const auto& a = scene.objects[i];
      const auto& b = scene.objects[j];
      const double pen = interpenetration(a.shape, a.pose, b.shape, b.pose);
      if (pen > kPenetrationTol) {
        std::ostringstream msg;
        msg << "objects " << a.id << " and " << b.id << " interpenetrate by " << pen << " m";
        throw FileFormatError(msg.str());
      }
    }

  for (const auto& o : scene.objects) {
    if (std::abs(o.base_z()) <= 5e-4) continue;  // rests on the table
    bool supported = false;
    const Footprint fo = footprint_of(o.shape, o.pose);
    for (const auto& s : scene.objects) {
      if (s.id == o.id) continue;
      if (std::abs(s.top_z() - o.base_z()) > 5e-4) continue;
      if (footprint_overlap(fo, footprint_of(s.shape, s.pose)) > 1e-9) {
        supported = true;
        break;
      }
    }
    if (!supported)
      throw FileFormatError("object " + std::to_string(o.id) + " is unsupported");
  }
}

// ---------------------------------------------------------------------------
// Operations

Scene remove_object(const Scene& scene, int id) {
  if (!scene.find(id)) throw LookupError("remove_object: unknown id " + std::to_string(id));
  Scene out = scene;
  std::erase_if(out.objects, [&](const ObjectInstance& o) { return o.id == id; });
  return out;
}

Scene settle(const Scene& scene) {
  Scene out = scene;
  std::vector<std::size_t> order(out.objects.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double za = out.objects[a].base_z(), zb = out.objects[b].base_z();
    if (za != zb) return za < zb;
    return out.objects[a].id < out.objects[b].id;
  });
  std::vector<std::size_t> settled;
  for (std::size_t idx : order) {
    auto& o = out.objects[idx];
    const Footprint fo = footprint_of(o.shape, o.pose);
    double support = 0.0;
    for (std::size_t s_idx : settled) {
      const auto& s = out.objects[s_idx];
      if (s.top_z() > o.base_z() + kSupportTol) continue;  // not beneath
      if (footprint_overlap(fo, footprint_of(s.shape, s.pose)) > 1e-9)
        support = std::max(support, s.top_z());
    }
    if (support < o.base_z() - 1e-9)
      o.pose.pos.z() = support + o.shape.half_height();
    settled.push_back(idx);
  }
  return out;
}

namespace {

/// Owner of a contact point: object whose surface is nearest, within 2 mm.
std::optional<int> contact_owner(const Scene& scene, const Vec3& p) {
  std::optional<int> best;
  double best_dist = kContactTol;
  for (const auto& o : scene.objects) {
    const double d = surface_distance(p, o.shape, o.pose);
    if (d < best_dist) {
      best_dist = d;
      best = o.id;
    }
  }
  return best;
}

/// Majority owner of a deterministic grid of probe points strictly between
/// the fingers; ties (including all-empty) fall back to the contact owner.
std::optional<int> attribute_grasp(const Scene& scene, const GraspCandidate& cand,
                                   const GripperSpec& gripper) {
  const Vec3 c = cand.closing_axis;
  const Vec3 a = cand.approach_axis;
  const Vec3 t = c.cross(a);
  std::vector<std::pair<int, int>> counts;  // (id, hits)
  for (const auto& o : scene.objects) counts.emplace_back(o.id, 0);

  const int nc = 9, na = 7, nt = 5;
  const double hw = 0.5 * cand.width * (1.0 - 1e-6);
  for (int i = 0; i < nc; ++i) {
    const double ci = -hw + 2 * hw * (i + 0.5) / nc;
    for (int j = 0; j < na; ++j) {
      const double aj = -gripper.finger_depth * (j + 0.5) / na;
      for (int k2 = 0; k2 < nt; ++k2) {
        const double tk = 0.5 * gripper.finger_thickness * (2.0 * (k2 + 0.5) / nt - 1.0);
        const Vec3 p = cand.center + ci * c + aj * a + tk * t;
        for (std::size_t oi = 0; oi < scene.objects.size(); ++oi) {
          const auto& o = scene.objects[oi];
          if (contains_point(p, o.shape, o.pose)) {
            counts[oi].second++;
            break;  // primitives do not interpenetrate beyond tolerance
          }
        }
      }
    }
  }
  int best_hits = 0;
  std::optional<int> best;
  bool tie = false;
  for (const auto& [id, hits] : counts) {
    if (hits > best_hits) {
      best_hits = hits;
      best = id;
      tie = false;
    } else if (hits == best_hits && hits > 0) {
      tie = true;
    }
  }
  if (best && !tie) return best;
  auto owner = contact_owner(scene, cand.contacts.p1);
  if (!owner) owner = contact_owner(scene, cand.contacts.p2);
  return owner;
}

}  // namespace

GraspOutcome execute_grasp(Scene& scene, const GraspCandidate& candidate,
                           const GripperSpec& gripper, const ExecuteNoise& noise,
                           double quality_threshold) {
  const auto owner1 = contact_owner(scene, candidate.contacts.p1);
  const auto owner2 = contact_owner(scene, candidate.contacts.p2);
  if (!owner1 && !owner2)
    throw InvalidCandidateError("grasp contacts lie on no object surface");

  GraspOutcome out;
  const auto grasped = attribute_grasp(scene, candidate, gripper);
  if (!grasped) {
    out.failure_reason = FailureReason::EmptyGrip;
    return out;
  }

  // collision against every other object's sampled surface
  std::vector<Vec3> others;
  for (const auto& o : scene.objects) {
    if (o.id == *grasped) continue;
    auto pts = sample_surface(o.shape, o.pose, 0.004);
    others.insert(others.end(), pts.begin(), pts.end());
  }
  if (!collision_free(others, candidate, gripper)) {
    out.failure_reason = FailureReason::Collision;
    return out;
  }
  if (candidate.score < quality_threshold) {
    out.failure_reason = FailureReason::LowQuality;
    return out;
  }
  if (candidate.width > gripper.max_opening) {
    out.failure_reason = FailureReason::EmptyGrip;
    return out;
  }
  if (noise.failure_prob > 0.0) {
    std::mt19937_64 rng(noise.seed);
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < noise.failure_prob) {
      out.failure_reason = FailureReason::Stochastic;
      return out;
    }
  }
  out.success = true;
  out.grasped_id = grasped;
  scene = settle(remove_object(scene, *grasped));
  return out;
}

bool goal_satisfied(const GraspOutcome& outcome, const GoalSpec& goal,
                    const Scene& scene_before_grasp) {
  if (!outcome.success || !outcome.grasped_id) return false;
  const ObjectInstance* obj = scene_before_grasp.find(*outcome.grasped_id);
  return obj && goal.matches(obj->category);
}

// ---------------------------------------------------------------------------
// Generation

namespace {

struct Generator {
  const SceneConfig& config;
  std::mt19937_64 rng;
  Scene scene;
  CameraModel camera;
  int next_id = 1;

  explicit Generator(const SceneConfig& cfg, std::uint64_t seed)
      : config(cfg), rng(seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL) {
    camera = default_camera(scene.workspace);
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  }

  Shape sample_shape(const CategorySpec& spec, bool bias_small) {
    auto draw = [&](double lo, double hi) {
      const double u = bias_small ? 0.3 * uniform(0, 1) : uniform(0, 1);
      return lo + u * (hi - lo);
    };
    Shape s;
    s.kind = spec.kind;
    switch (spec.kind) {
      case ShapeKind::Sphere:
        s.dims = {draw(spec.dims_min.x(), spec.dims_max.x())};
        break;
      case ShapeKind::Cylinder:
        s.dims = {draw(spec.dims_min.x(), spec.dims_max.x()),
                  draw(spec.dims_min.y(), spec.dims_max.y())};
        break;
      case ShapeKind::Box:
        s.dims = {draw(spec.dims_min.x(), spec.dims_max.x()),
                  draw(spec.dims_min.y(), spec.dims_max.y()),
                  draw(spec.dims_min.z(), spec.dims_max.z())};
        break;
    }
    return s;
  }

  ObjectInstance make_object(const std::string& category, bool bias_small) {
    const CategorySpec* spec = find_category(category);
    ObjectInstance o;
    o.id = next_id++;
    o.category = category;
    o.color = color_palette()[std::size_t(uniform_int(0, int(color_palette().size()) - 1))];
    o.shape = sample_shape(*spec, bias_small);
    o.pose.yaw = uniform(0, 2 * M_PI);
    if (spec->has_handle_part) {
      // handle = rear 40% of the blade box
      const double sx = o.shape.dims[0], sy = o.shape.dims[1], sz = o.shape.dims[2];
      ObjectPart part;
      part.name = "handle";
      part.box.center = Vec3(-0.30 * sx, 0, 0);
      part.box.half = Vec3(0.20 * sx, 0.5 * sy, 0.5 * sz);
      o.parts.push_back(part);
    }
    return o;
  }

  double support_height(const ObjectInstance& o) const {
    const Footprint fo = footprint_of(o.shape, o.pose);
    double h = 0.0;
    for (const auto& s : scene.objects)
      if (footprint_overlap(fo, footprint_of(s.shape, s.pose)) > 1e-9)
        h = std::max(h, s.top_z());
    return h;
  }

  bool placement_ok(const ObjectInstance& o, double goal_clearance) const {
    const auto& ws = scene.workspace;
    const double fr = o.shape.footprint_radius();
    if (o.pose.pos.x() - fr < ws.min.x() || o.pose.pos.x() + fr > ws.max.x() ||
        o.pose.pos.y() - fr < ws.min.y() || o.pose.pos.y() + fr > ws.max.y() ||
        o.top_z() > ws.max.z())
      return false;
    for (const auto& s : scene.objects) {
      if (interpenetration(o.shape, o.pose, s.shape, s.pose) > 0) return false;
      if (goal_clearance > 0 && s.id == 1) {  // the goal is always id 1
        const double gap = (Vec2(o.pose.pos.x(), o.pose.pos.y()) -
                            Vec2(s.pose.pos.x(), s.pose.pos.y()))
                               .norm() -
                           fr - s.shape.footprint_radius();
        if (gap < goal_clearance) return false;
      }
    }
    return true;
  }

  std::size_t goal_visible_pixels() const {
    const Observation obs = render(scene, camera);
    return std::size_t(std::count(obs.pixel_owner.begin(), obs.pixel_owner.end(), 1));
  }

  /// Mean camera ray toward the still-visible goal pixels, as a world point.
  std::optional<Vec3> goal_visible_centroid() const {
    const Observation obs = render(scene, camera);
    Vec3 sum = Vec3::Zero();
    std::size_t n = 0;
    for (std::size_t i = 0; i < obs.cloud.size(); ++i) {
      const auto px = obs.cloud.source_pixels[i];
      if (obs.pixel_owner[obs.idx(px.u, px.v)] == 1) {
        sum += obs.cloud.points[i];
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / double(n);
  }

  bool place_goal() {
    ObjectInstance goal = make_object(config.goal_category,
                                      config.goal_visibility != GoalVisibility::Visible);
    goal.id = 1;
    for (int tries = 0; tries < 50; ++tries) {
      goal.pose.pos = Vec3(uniform(-0.12, 0.12), uniform(-0.12, 0.12), 0);
      goal.pose.pos.z() = goal.shape.half_height();
      if (placement_ok(goal, 0.0)) {
        scene.objects.push_back(goal);
        return true;
      }
    }
    return false;
  }

  /// Cylinder pool used to cover the goal; all are graspable from a single
  /// view so the uncovering loop can always make progress.
  const std::vector<std::string>& occluder_pool() const {
    static const std::vector<std::string> pool = {"bottle", "can", "cup", "mug"};
    return pool;
  }

  bool place_occluders_buried() {
    const ObjectInstance& goal = scene.objects.front();
    for (int added = 0; added < 3; ++added) {
      if (goal_visible_pixels() == 0) return true;
      const auto centroid = goal_visible_centroid();
      if (!centroid) return true;
      bool placed = false;
      for (int tries = 0; tries < 30 && !placed; ++tries) {
        ObjectInstance occ = make_object(occluder_pool()[std::size_t(uniform_int(
                                             0, int(occluder_pool().size()) - 1))],
                                         false);
        // between the visible patch and the camera, sitting on the pile
        const double toward = uniform(0.0, 0.05);
        occ.pose.pos = Vec3(centroid->x() + uniform(-0.02, 0.02),
                            centroid->y() - toward, 0);
        occ.pose.pos.z() = occ.shape.half_height() + support_height(occ);
        if (!placement_ok(occ, 0.0)) continue;
        scene.objects.push_back(occ);
        placed = true;
      }
      if (!placed) return false;
    }
    return goal_visible_pixels() == 0;
  }

  bool place_occluder_partial() {
    const ObjectInstance& goal = scene.objects.front();
    for (int tries = 0; tries < 60; ++tries) {
      ObjectInstance occ = make_object(occluder_pool()[std::size_t(uniform_int(
                                           0, int(occluder_pool().size()) - 1))],
                                       false);
      occ.pose.pos = Vec3(goal.pose.pos.x() + uniform(-0.03, 0.03),
                          goal.pose.pos.y() - uniform(0.0, 0.06), 0);
      occ.pose.pos.z() = occ.shape.half_height() + support_height(occ);
      if (!placement_ok(occ, 0.0)) continue;
      scene.objects.push_back(occ);
      const double f = visible_fraction(scene, camera, 1);
      if (f > 0.0 && f <= 0.15) return true;
      scene.objects.pop_back();
      next_id--;  // reuse the id for the next try
    }
    return false;
  }

  bool place_clutter(int count) {
    const bool heavy = config.clutter_level == ClutterLevel::Heavy;
    std::vector<std::string> pool;
    for (const auto& c : category_vocabulary())
      if (c.name != config.goal_category) pool.push_back(c.name);
    int placed_clutter = 0;
    std::vector<int> clutter_ids;
    for (int i = 0; i < count; ++i) {
      bool placed = false;
      for (int tries = 0; tries < 80 && !placed; ++tries) {
        ObjectInstance o =
            make_object(pool[std::size_t(uniform_int(0, int(pool.size()) - 1))], false);
        const bool stack = heavy && !clutter_ids.empty() && uniform(0, 1) < 0.35;
        if (stack) {
          const int sid = clutter_ids[std::size_t(uniform_int(0, int(clutter_ids.size()) - 1))];
          const ObjectInstance* sup = scene.find(sid);
          o.pose.pos = Vec3(sup->pose.pos.x() + uniform(-0.01, 0.01),
                            sup->pose.pos.y() + uniform(-0.01, 0.01), 0);
        } else {
          o.pose.pos = Vec3(uniform(scene.workspace.min.x() + 0.05, scene.workspace.max.x() - 0.05),
                            uniform(scene.workspace.min.y() + 0.05, scene.workspace.max.y() - 0.05),
                            0);
        }
        o.pose.pos.z() = o.shape.half_height() + support_height(o);
        if (!placement_ok(o, 0.02)) continue;
        scene.objects.push_back(o);
        clutter_ids.push_back(o.id);
        placed = true;
      }
      if (!placed) return false;
      ++placed_clutter;
    }
    return placed_clutter == count;
  }

  std::optional<Scene> attempt() {
    scene.objects.clear();
    next_id = 1;
    if (!place_goal()) return std::nullopt;
    int occluders = 0;
    if (config.goal_visibility == GoalVisibility::Buried) {
      const std::size_t before = scene.objects.size();
      if (!place_occluders_buried()) return std::nullopt;
      occluders = int(scene.objects.size() - before);
      if (occluders == 0) return std::nullopt;  // a lone object is never buried
    } else if (config.goal_visibility == GoalVisibility::Occluded) {
      if (scene.objects.size() >= std::size_t(config.n_objects)) return std::nullopt;
      if (!place_occluder_partial()) return std::nullopt;
      occluders = 1;
    }
    const int remaining = config.n_objects - 1 - occluders;
    if (remaining < 0) return std::nullopt;  // more occluders than the budget allows
    if (!place_clutter(remaining)) return std::nullopt;

    switch (config.goal_visibility) {
      case GoalVisibility::Visible:
        if (visible_fraction(scene, camera, 1) <= 0.15) return std::nullopt;
        break;
      case GoalVisibility::Occluded: {
        const double f = visible_fraction(scene, camera, 1);
        if (!(f > 0.0 && f <= 0.15)) return std::nullopt;
        break;
      }
      case GoalVisibility::Buried:
        if (goal_visible_pixels() != 0) return std::nullopt;
        break;
    }
    return scene;
  }
};

}  // namespace

Scene generate_scene(const SceneConfig& config, std::uint64_t seed) {
  if (config.n_objects < 1) throw GenerationError("n_objects must be >= 1");
  if (!find_category(config.goal_category))
    throw GenerationError("unknown goal category: " + config.goal_category);
  if (config.n_objects == 1 && config.goal_visibility != GoalVisibility::Visible)
    throw GenerationError("a single object cannot be occluded or buried");

  Generator gen(config, seed);
  for (int attempt = 0; attempt < 40; ++attempt) {
    auto result = gen.attempt();
    if (result) {
      result->seed = seed;
      validate_scene(*result);
      return *result;
    }
  }
  throw GenerationError("scene placement failed after bounded retries");
}

}  // namespace thinkgrasp
