// SPDX-License-Identifier: Apache-2.0
#include "thinkgrasp/selector.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "thinkgrasp/errors.hpp"
#include "thinkgrasp/grasp.hpp"
#include "thinkgrasp/planner.hpp"

namespace thinkgrasp {

const ObjectProperty& SelectorResponse::selected_property() const {
  for (const auto& p : properties) {
    if (p.color_name == selected) return p;
  }
  // part selections may name "color category part" while the property list
  // carries "color category"
  for (const auto& p : properties) {
    if (selected.rfind(p.color_name + " ", 0) == 0) return p;
    if (p.color_name.rfind(selected + " ", 0) == 0) return p;
  }
  throw ParseError("selected '" + selected + "' has no matching property entry");
}

// ---------------------------------------------------------------------------
// Prompt

std::string build_prompt(const SelectorRequest& request) {
  std::ostringstream out;
  out << "Given a 224x224 input image and the provided instruction, perform the "
         "following steps:\n"
      << "\n"
      << "Instruction: " << request.instruction << "\n"
      << "\n"
      << "Target Object Selection:\n"
      << "Identify the object in the image that best matches the instruction. If the "
         "target object is found, select it as the target object.\n"
      << "If the target object is not visible, select the most cost-effective object or "
         "object part considering ease of grasping, importance, and safety.\n"
      << "If the object has a handle or a part that is easier or safer to grasp, select "
         "the part. [for example the handle of a knife]\n"
      << "Consider the geometric shape of the objects and the gripper's success rate "
         "when selecting the target object or object part.\n"
      << "Output the name of the selected object or object part as [object:color and "
         "name] or [object part:color and name].\n"
      << "Round object means like ball. Cup is different from mug.\n"
      << "\n"
      << "Cropping Box Calculation:\n"
      << "Calculate a cropping box that includes the target object and all surrounding "
         "objects that might be relevant for grasping.\n"
      << "Provide the coordinates of the cropping box in the format (top-left x, "
         "top-left y, bottom-right x, bottom-right y).\n"
      << "\n"
      << "Object Properties within Cropping Box:\n"
      << "For each object within the cropping box, provide the following properties:\n"
      << "Grasping Score: Evaluate the ease or difficulty of grasping the object on a "
         "scale from 0 to 100 (0 being extremely difficult, 100 being extremely easy).\n"
      << "Preferred Grasping Location: Divide the cropping box into a 3x3 grid and "
         "return a number from 1 to 9 indicating the preferred grasping location (1 for "
         "top-left, 9 for bottom-right).\n"
      << "Additionally, consider the preferred grasping location that is most "
         "successful for the UR5 robotic arm and gripper.\n"
      << "\n"
      << "Output should be in the following format:\n"
      << "Selected Object/Object Part: [object:color and name] or [object part:color "
         "and name]\n"
      << "Cropping Box Coordinates: (top-left x, top-left y, bottom-right x, "
         "bottom-right y)\n"
      << "Objects and Their Properties:\n"
      << "Object: [color and name]\n"
      << "Grasping Score: [value]\n"
      << "Preferred Grasping Location: [value]\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const auto a = s.find_first_not_of(ws);
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

std::string normalize_name(const std::string& s) {
  std::string out;
  bool pending_space = false;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(char(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

std::string lower(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) out.push_back(char(std::tolower(static_cast<unsigned char>(ch))));
  return out;
}

/// If the line starts with `key:` (case-insensitive), return the value part.
std::optional<std::string> match_key(const std::string& line, const std::string& key) {
  const std::string l = lower(line);
  if (l.rfind(lower(key), 0) != 0) return std::nullopt;
  const auto colon = line.find(':', key.size());
  if (colon == std::string::npos) return std::nullopt;
  // only whitespace may sit between the key and the colon
  for (std::size_t i = key.size(); i < colon; ++i)
    if (!std::isspace(static_cast<unsigned char>(line[i]))) return std::nullopt;
  return trim(line.substr(colon + 1));
}

std::optional<int> location_value(const std::string& raw) {
  static const std::map<std::string, int> words = {
      {"top-left", 1}, {"top", 2},    {"top-right", 3},
      {"left", 4},     {"middle", 5}, {"right", 6},
      {"bottom-left", 7}, {"bottom", 8}, {"bottom-right", 9},
  };
  std::string norm = normalize_name(raw);
  std::replace(norm.begin(), norm.end(), ' ', '-');
  if (auto it = words.find(norm); it != words.end()) return it->second;
  try {
    std::size_t used = 0;
    const int v = std::stoi(norm, &used);
    if (used == norm.size()) return v;
  } catch (...) {
  }
  return std::nullopt;
}

std::vector<long> extract_ints(const std::string& s) {
  std::vector<long> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (std::isdigit(static_cast<unsigned char>(s[i])) ||
        (s[i] == '-' && i + 1 < s.size() &&
         std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t used = 0;
      out.push_back(std::stol(s.substr(i), &used));
      i += used;
    } else if (std::isalpha(static_cast<unsigned char>(s[i]))) {
      return {};  // letters inside the coordinate list: unparsable
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace

SelectorResponse parse_response(const std::string& text) {
  SelectorResponse resp;
  bool have_selected = false, have_crop = false;

  struct OpenProperty {
    std::string name;
    std::optional<int> score;
    std::optional<int> location;
  };
  std::optional<OpenProperty> open;

  auto close_property = [&]() {
    if (!open) return;
    if (!open->score) throw ParseError("property '" + open->name + "' missing Grasping Score");
    if (!open->location)
      throw ParseError("property '" + open->name + "' missing Preferred Grasping Location");
    resp.properties.push_back({open->name, *open->score, *open->location});
    open.reset();
  };

  std::istringstream stream(text);
  std::string raw_line;
  while (std::getline(stream, raw_line)) {
    const std::string line = trim(raw_line);
    if (line.empty()) continue;

    if (auto value = match_key(line, "Selected Object/Object Part")) {
      if (have_selected) continue;  // first one wins
      std::string v = trim(*value);
      if (!v.empty() && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
      const auto colon = v.find(':');
      if (colon == std::string::npos)
        throw ParseError("selected line has no kind:name separator");
      const std::string kind = normalize_name(v.substr(0, colon));
      if (kind == "object")
        resp.kind = SelectionKind::Object;
      else if (kind == "object part")
        resp.kind = SelectionKind::Part;
      else
        throw ParseError("unknown selection kind '" + kind + "'");
      resp.selected = normalize_name(v.substr(colon + 1));
      if (resp.selected.empty()) throw ParseError("empty selected name");
      have_selected = true;
      continue;
    }
    if (auto value = match_key(line, "Cropping Box Coordinates")) {
      const auto ints = extract_ints(*value);
      if (ints.size() != 4) throw ParseError("cropping box needs exactly 4 integers");
      resp.crop_box = {int(ints[0]), int(ints[1]), int(ints[2]), int(ints[3])};
      if (resp.crop_box.x1 < 0 || resp.crop_box.y1 < 0 || !resp.crop_box.valid())
        throw ParseError("cropping box coordinates out of range");
      have_crop = true;
      continue;
    }
    if (auto value = match_key(line, "Objects and Their Properties")) {
      continue;
    }
    if (auto value = match_key(line, "Object")) {
      close_property();
      open = OpenProperty{normalize_name(*value), std::nullopt, std::nullopt};
      if (open->name.empty()) throw ParseError("empty object name in properties");
      continue;
    }
    if (auto value = match_key(line, "Grasping Score")) {
      if (!open) throw ParseError("Grasping Score outside an Object block");
      int v = 0;
      try {
        std::size_t used = 0;
        v = std::stoi(*value, &used);
        if (used != value->size()) throw ParseError("");
      } catch (...) {
        throw ParseError("unparsable grasping score '" + *value + "'");
      }
      if (v < 0 || v > 100)
        throw ParseError("grasping score " + std::to_string(v) + " out of range 0-100");
      open->score = v;
      continue;
    }
    if (auto value = match_key(line, "Preferred Grasping Location")) {
      if (!open) throw ParseError("Preferred Grasping Location outside an Object block");
      const auto v = location_value(*value);
      if (!v) throw ParseError("unparsable preferred location '" + *value + "'");
      if (*v < 1 || *v > 9)
        throw ParseError("preferred location " + std::to_string(*v) + " out of range 1-9");
      open->location = *v;
      continue;
    }
    // unknown lines are ignored
  }
  close_property();

  if (!have_selected) throw ParseError("missing 'Selected Object/Object Part' line");
  if (!have_crop) throw ParseError("missing or unparsable cropping box");
  if (resp.properties.empty()) throw ParseError("no object properties listed");
  validate_response(resp);
  return resp;
}

std::string format_response(const SelectorResponse& response) {
  std::ostringstream out;
  out << "Selected Object/Object Part: ["
      << (response.kind == SelectionKind::Object ? "object" : "object part") << ":"
      << response.selected << "]\n";
  out << "Cropping Box Coordinates: (" << response.crop_box.x1 << ", "
      << response.crop_box.y1 << ", " << response.crop_box.x2 << ", "
      << response.crop_box.y2 << ")\n";
  out << "Objects and Their Properties:\n";
  for (const auto& p : response.properties) {
    out << "Object: " << p.color_name << "\n";
    out << "Grasping Score: " << p.grasping_score << "\n";
    out << "Preferred Grasping Location: " << p.preferred_location << "\n";
  }
  return out.str();
}

void validate_response(const SelectorResponse& response) {
  if (response.selected.empty()) throw ParseError("empty selected name");
  if (!response.crop_box.valid() || response.crop_box.x1 < 0 || response.crop_box.y1 < 0)
    throw ParseError("invalid crop box");
  if (response.properties.empty()) throw ParseError("no properties");
  for (const auto& p : response.properties) {
    if (p.grasping_score < 0 || p.grasping_score > 100)
      throw ParseError("grasping score out of range");
    if (p.preferred_location < 1 || p.preferred_location > 9)
      throw ParseError("preferred location out of range");
  }
  response.selected_property();  // throws when the selected entry is missing
}

// ---------------------------------------------------------------------------
// Scripted / random selection

namespace {

struct VisibleStats {
  int id = 0;
  std::size_t pixels = 0;
  Vec2 centroid = Vec2::Zero();
  PixelBox bbox{1 << 30, 1 << 30, 0, 0};
};

std::map<int, VisibleStats> visible_stats(const Observation& obs) {
  std::map<int, VisibleStats> stats;
  for (int v = 0; v < obs.height(); ++v)
    for (int u = 0; u < obs.width(); ++u) {
      const int id = obs.pixel_owner[obs.idx(u, v)];
      if (id < 0) continue;
      auto& s = stats[id];
      s.id = id;
      s.pixels++;
      s.centroid += Vec2(u, v);
      s.bbox.x1 = std::min(s.bbox.x1, u);
      s.bbox.y1 = std::min(s.bbox.y1, v);
      s.bbox.x2 = std::max(s.bbox.x2, u + 1);
      s.bbox.y2 = std::max(s.bbox.y2, v + 1);
    }
  for (auto& [id, s] : stats) s.centroid /= double(s.pixels);
  return stats;
}

/// 100 x the force-closure score of the best analytic grasp on the lone
/// primitive: 1.0 when some opposing-face width fits the gripper, else 0.
int analytic_grasping_score(const ObjectInstance& obj, const GripperSpec& gripper) {
  double min_width = 0.0;
  switch (obj.shape.kind) {
    case ShapeKind::Sphere:
      min_width = 2.0 * obj.shape.dims[0];
      break;
    case ShapeKind::Box:
      min_width = std::min({obj.shape.dims[0], obj.shape.dims[1], obj.shape.dims[2]});
      break;
    case ShapeKind::Cylinder:
      min_width = std::min(2.0 * obj.shape.dims[0], obj.shape.dims[1]);
      break;
  }
  return min_width <= gripper.max_opening ? 100 : 0;
}

std::string color_name_of(const ObjectInstance& obj) {
  return obj.color + " " + obj.category;
}

SelectorResponse build_response(const Observation& obs, const Scene& scene,
                                const std::map<int, VisibleStats>& stats,
                                int selected_id) {
  const ObjectInstance* sel = scene.find(selected_id);
  const VisibleStats& sel_stats = stats.at(selected_id);

  SelectorResponse resp;
  const ObjectPart* part = sel->parts.empty() ? nullptr : &sel->parts.front();
  if (part) {
    resp.kind = SelectionKind::Part;
    resp.selected = color_name_of(*sel) + " " + part->name;
  } else {
    resp.kind = SelectionKind::Object;
    resp.selected = color_name_of(*sel);
  }

  // crop: selected object plus touching neighbors, padded by 8 px
  const Aabb sel_aabb = primitive_aabb(sel->shape, sel->pose);
  PixelBox crop = sel_stats.bbox;
  std::vector<int> in_crop = {selected_id};
  for (const auto& o : scene.objects) {
    if (o.id == selected_id || !stats.count(o.id)) continue;
    const Aabb a = primitive_aabb(o.shape, o.pose);
    const bool touching = a.min.x() <= sel_aabb.max.x() + 0.01 &&
                          a.max.x() >= sel_aabb.min.x() - 0.01 &&
                          a.min.y() <= sel_aabb.max.y() + 0.01 &&
                          a.max.y() >= sel_aabb.min.y() - 0.01 &&
                          a.min.z() <= sel_aabb.max.z() + 0.01 &&
                          a.max.z() >= sel_aabb.min.z() - 0.01;
    if (touching) crop = crop.union_with(stats.at(o.id).bbox);
  }
  crop = PixelBox{crop.x1 - 8, crop.y1 - 8, crop.x2 + 8, crop.y2 + 8}.intersect(
      {0, 0, obs.width(), obs.height()});
  resp.crop_box = crop;

  // properties: every visible object whose bbox intersects the crop box
  GripperSpec gripper;
  if (part) {
    ObjectProperty p;
    p.color_name = resp.selected;
    p.grasping_score = analytic_grasping_score(*sel, gripper);
    p.preferred_location = cell_of(sel_stats.bbox, sel_stats.centroid).index;
    resp.properties.push_back(p);
  }
  for (const auto& o : scene.objects) {
    auto it = stats.find(o.id);
    if (it == stats.end()) continue;
    if (!it->second.bbox.intersect(crop).valid()) continue;
    ObjectProperty p;
    p.color_name = color_name_of(o);
    p.grasping_score = analytic_grasping_score(o, gripper);
    p.preferred_location = cell_of(it->second.bbox, it->second.centroid).index;
    resp.properties.push_back(p);
  }
  validate_response(resp);
  return resp;
}

}  // namespace

SelectorResponse scripted_select(const Observation& obs, const GoalSpec& goal,
                                 const Scene& scene, const ScriptedParams& params) {
  const auto stats = visible_stats(obs);
  if (stats.empty()) throw SelectionError("nothing visible to select");

  // grab the goal directly when it is visible enough
  const ObjectInstance* goal_obj = nullptr;
  for (const auto& o : scene.objects)
    if (goal.matches(o.category)) {
      goal_obj = &o;
      break;
    }

  if (goal_obj && stats.count(goal_obj->id)) {
    if (params.goal_only) return build_response(obs, scene, stats, goal_obj->id);
    const double fraction = visible_fraction(scene, obs.camera, goal_obj->id);
    if (fraction >= params.v_min) return build_response(obs, scene, stats, goal_obj->id);
  }
  if (params.goal_only) throw SelectionError("goal not visible (goal-only matching)");

  // otherwise the occluder most worth removing: visible area x centrality,
  // preferring occluders over the goal's footprint when the goal is known
  std::vector<const VisibleStats*> pool;
  if (goal_obj) {
    const Footprint goal_fp = footprint_of(goal_obj->shape, goal_obj->pose);
    for (const auto& [id, s] : stats) {
      if (id == goal_obj->id) continue;
      const ObjectInstance* o = scene.find(id);
      if (footprint_overlap(goal_fp, footprint_of(o->shape, o->pose)) > 1e-9)
        pool.push_back(&s);
    }
  }
  if (pool.empty()) {
    for (const auto& [id, s] : stats)
      if (!goal_obj || id != goal_obj->id) pool.push_back(&s);
  }
  if (pool.empty()) throw SelectionError("no occluder candidate visible");

  const Vec2 image_center(0.5 * obs.width(), 0.5 * obs.height());
  const double max_dist = 0.5 * std::hypot(double(obs.width()), double(obs.height()));
  const VisibleStats* best = nullptr;
  double best_priority = -1.0;
  for (const VisibleStats* s : pool) {
    const double centrality = 1.0 - (s->centroid - image_center).norm() / max_dist;
    const double priority = double(s->pixels) * centrality;
    if (priority > best_priority ||
        (priority == best_priority && best && s->id < best->id)) {
      best_priority = priority;
      best = s;
    }
  }
  return build_response(obs, scene, stats, best->id);
}

SelectorResponse random_select(const Observation& obs, const Scene& scene,
                               std::uint64_t seed) {
  const auto stats = visible_stats(obs);
  if (stats.empty()) throw SelectionError("nothing visible to select");
  std::vector<int> ids;
  for (const auto& [id, s] : stats) ids.push_back(id);  // map iterates in id order
  std::mt19937_64 rng(seed);
  const int id = ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(rng)];
  return build_response(obs, scene, stats, id);
}

}  // namespace thinkgrasp
