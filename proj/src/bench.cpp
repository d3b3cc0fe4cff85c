// SPDX-License-Identifier: Apache-2.0
#include "thinkgrasp/bench.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "thinkgrasp/errors.hpp"

namespace thinkgrasp {

using nlohmann::json;

SuiteMetrics aggregate(const std::vector<EpisodeResult>& episodes) {
  SuiteMetrics m;
  m.n_runs = int(episodes.size());
  if (episodes.empty()) return m;
  int successes = 0;
  double motion_sum = 0.0, success_motion_sum = 0.0;
  for (const auto& e : episodes) {
    motion_sum += e.motions;
    if (e.success) {
      ++successes;
      success_motion_sum += e.motions;
    }
  }
  m.task_success_rate = double(successes) / double(episodes.size());
  m.mean_steps_all = motion_sum / double(episodes.size());
  if (successes > 0) m.motion_number = success_motion_sum / double(successes);
  return m;
}

// ---------------------------------------------------------------------------
// Scene persistence

namespace {

std::string kind_name(ShapeKind k) {
  switch (k) {
    case ShapeKind::Sphere: return "sphere";
    case ShapeKind::Box: return "box";
    case ShapeKind::Cylinder: return "cylinder";
  }
  return "sphere";
}

ShapeKind kind_from(const std::string& s) {
  if (s == "sphere") return ShapeKind::Sphere;
  if (s == "box") return ShapeKind::Box;
  if (s == "cylinder") return ShapeKind::Cylinder;
  throw FileFormatError("unknown shape kind: '" + s + "'");
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw FileFormatError(std::string(what) + ": expected [x, y, z]");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

std::string scene_to_json(const Scene& scene) {
  json j;
  j["schema_version"] = 1;
  j["seed"] = scene.seed;
  j["workspace"] = {{"min", vec3_json(scene.workspace.min)},
                    {"max", vec3_json(scene.workspace.max)}};
  json objects = json::array();
  for (const auto& o : scene.objects) {
    json jo;
    jo["id"] = o.id;
    jo["category"] = o.category;
    jo["color"] = o.color;
    jo["shape"] = {{"kind", kind_name(o.shape.kind)}, {"dims", o.shape.dims}};
    jo["pose"] = {{"pos", vec3_json(o.pose.pos)}, {"yaw", o.pose.yaw}};
    json parts = json::array();
    for (const auto& p : o.parts) {
      parts.push_back({{"name", p.name},
                       {"box",
                        {p.box.center.x(), p.box.center.y(), p.box.center.z(),
                         p.box.half.x(), p.box.half.y(), p.box.half.z()}}});
    }
    jo["parts"] = parts;
    objects.push_back(jo);
  }
  j["objects"] = objects;
  return j.dump(2) + "\n";
}

Scene scene_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FileFormatError(std::string("scene file is not valid JSON: ") + e.what());
  }
  try {
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
      throw FileFormatError("scene file: unknown or missing schema_version");
    Scene scene;
    scene.seed = j.value("seed", std::uint64_t(0));
    if (j.contains("workspace")) {
      scene.workspace.min = vec3_from(j["workspace"]["min"], "workspace.min");
      scene.workspace.max = vec3_from(j["workspace"]["max"], "workspace.max");
    }
    for (const auto& jo : j.at("objects")) {
      ObjectInstance o;
      o.id = jo.at("id").get<int>();
      o.category = jo.at("category").get<std::string>();
      o.color = jo.at("color").get<std::string>();
      o.shape.kind = kind_from(jo.at("shape").at("kind").get<std::string>());
      o.shape.dims = jo.at("shape").at("dims").get<std::vector<double>>();
      o.pose.pos = vec3_from(jo.at("pose").at("pos"), "pose.pos");
      o.pose.yaw = jo.at("pose").at("yaw").get<double>();
      for (const auto& jp : jo.value("parts", json::array())) {
        ObjectPart p;
        p.name = jp.at("name").get<std::string>();
        const auto& b = jp.at("box");
        if (!b.is_array() || b.size() != 6)
          throw FileFormatError("part box: expected [cx, cy, cz, hx, hy, hz]");
        p.box.center = Vec3(b[0], b[1], b[2]);
        p.box.half = Vec3(b[3], b[4], b[5]);
        o.parts.push_back(p);
      }
      scene.objects.push_back(o);
    }
    validate_scene(scene);
    return scene;
  } catch (const json::exception& e) {
    throw FileFormatError(std::string("scene file: ") + e.what());
  }
}

void save_scene(const Scene& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FileFormatError("cannot open for writing: " + path);
  out << scene_to_json(scene);
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileFormatError("cannot open scene file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return scene_from_json(buf.str());
}

// ---------------------------------------------------------------------------
// Suites

namespace {

SceneConfig scene_config_from(const json& j) {
  SceneConfig c;
  c.n_objects = j.at("n_objects").get<int>();
  const std::string level = j.value("clutter_level", "light");
  if (level == "light")
    c.clutter_level = ClutterLevel::Light;
  else if (level == "heavy")
    c.clutter_level = ClutterLevel::Heavy;
  else
    throw FileFormatError("unknown clutter_level: " + level);
  c.goal_category = j.at("goal_category").get<std::string>();
  const std::string vis = j.value("goal_visibility", "visible");
  if (vis == "visible")
    c.goal_visibility = GoalVisibility::Visible;
  else if (vis == "occluded")
    c.goal_visibility = GoalVisibility::Occluded;
  else if (vis == "buried")
    c.goal_visibility = GoalVisibility::Buried;
  else
    throw FileFormatError("unknown goal_visibility: " + vis);
  return c;
}

EpisodeConfig episode_config_from(const json& j) {
  EpisodeConfig c;
  c.max_steps = j.value("max_steps", 15);
  c.top_k = j.value("top_k", 10);
  const std::string sel = j.value("selector", "scripted");
  if (sel == "scripted")
    c.selector_kind = SelectorKind::Scripted;
  else if (sel == "remote")
    c.selector_kind = SelectorKind::Remote;
  else if (sel == "random")
    c.selector_kind = SelectorKind::Random;
  else
    throw FileFormatError("unknown selector: " + sel);
  c.endpoint = j.value("endpoint", "");
  for (const auto& a : j.value("ablation", json::array())) {
    const std::string name = a.get<std::string>();
    if (name == "no_grid")
      c.ablation.no_grid = true;
    else if (name == "crop_only")
      c.ablation.crop_only = true;
    else if (name == "no_selector")
      c.ablation.no_selector = true;
    else
      throw FileFormatError("unknown ablation flag: " + name);
  }
  c.failure_prob = j.value("failure_prob", 0.0);
  if (j.contains("segment_noise")) {
    const auto& n = j["segment_noise"];
    c.segment_noise.dilation_px = n.value("dilation_px", 0);
    c.segment_noise.confidence_jitter = n.value("confidence_jitter", 0.0);
    c.segment_noise.seed = n.value("seed", std::uint64_t(0));
  }
  return c;
}

GoalSpec goal_from(const json& j) {
  GoalSpec g;
  g.instruction = j.at("instruction").get<std::string>();
  if (j.contains("categories"))
    g.goal_categories = j["categories"].get<std::vector<std::string>>();
  else
    g = goal_from_instruction(g.instruction);
  if (g.goal_categories.empty()) throw FileFormatError("goal categories empty");
  return g;
}

}  // namespace

Suite suite_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FileFormatError(std::string("suite file is not valid JSON: ") + e.what());
  }
  try {
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
      throw FileFormatError("suite file: unknown or missing schema_version");
    Suite suite;
    for (const auto& jc : j.at("cases")) {
      SuiteCase c;
      c.config_id = jc.at("config_id").get<std::string>();
      c.scene_config = scene_config_from(jc.at("scene"));
      c.goal = goal_from(jc.at("goal"));
      c.episode = jc.contains("episode") ? episode_config_from(jc["episode"])
                                         : EpisodeConfig{};
      c.seeds = jc.at("seeds").get<std::vector<std::uint64_t>>();
      if (c.seeds.empty()) throw FileFormatError("case '" + c.config_id + "': no seeds");
      suite.cases.push_back(std::move(c));
    }
    for (const auto& jp : j.value("policies", json::array())) {
      suite.policies.emplace_back(jp.at("name").get<std::string>(),
                                  episode_config_from(jp));
    }
    return suite;
  } catch (const json::exception& e) {
    throw FileFormatError(std::string("suite file: ") + e.what());
  }
}

Suite load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileFormatError("cannot open suite file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return suite_from_json(buf.str());
}

// ---------------------------------------------------------------------------
// Execution

namespace {

std::uint64_t rep_seed(std::uint64_t seed, int rep) {
  return rep == 0 ? seed : seed + 0x9e3779b9ULL * std::uint64_t(rep);
}

EpisodeResult run_one(const SuiteCase& c, const EpisodeConfig& episode,
                      std::uint64_t seed) {
  EpisodeResult r;
  try {
    Scene scene = generate_scene(c.scene_config, seed);
    r = run_episode(std::move(scene), c.goal, episode, seed);
  } catch (const Error&) {
    r = EpisodeResult{};  // generation failure counts as a failed episode
  }
  r.seed = seed;
  r.config_id = c.config_id;
  return r;
}

}  // namespace

std::vector<CaseResult> run_benchmark(const Suite& suite, int runs_per_case) {
  if (runs_per_case < 1) throw LookupError("runs_per_case must be >= 1");
  std::vector<CaseResult> out;
  for (const auto& c : suite.cases) {
    CaseResult cr;
    cr.config_id = c.config_id;
    for (int rep = 0; rep < runs_per_case; ++rep)
      for (std::uint64_t seed : c.seeds)
        cr.episodes.push_back(run_one(c, c.episode, rep_seed(seed, rep)));
    cr.metrics = aggregate(cr.episodes);
    out.push_back(std::move(cr));
  }
  return out;
}

CompareReport compare_policies(
    const Suite& suite,
    const std::vector<std::pair<std::string, EpisodeConfig>>& policies) {
  if (policies.empty()) throw LookupError("compare_policies: no policies given");
  CompareReport report;
  for (const auto& [name, episode] : policies) {
    PolicyReport pr;
    pr.policy = name;
    std::vector<EpisodeResult> all;
    for (const auto& c : suite.cases) {
      CaseResult cr;
      cr.config_id = c.config_id;
      for (std::uint64_t seed : c.seeds)
        cr.episodes.push_back(run_one(c, episode, seed));
      cr.metrics = aggregate(cr.episodes);
      all.insert(all.end(), cr.episodes.begin(), cr.episodes.end());
      pr.cases.push_back(std::move(cr));
    }
    pr.overall = aggregate(all);
    report.policies.push_back(std::move(pr));
  }

  const PolicyReport& base = report.policies.front();
  for (std::size_t p = 1; p < report.policies.size(); ++p) {
    const PolicyReport& other = report.policies[p];
    PairedDiff diff;
    diff.policy = other.policy;
    double sum = 0.0;
    int n = 0;
    for (std::size_t ci = 0; ci < base.cases.size(); ++ci)
      for (std::size_t ei = 0; ei < base.cases[ci].episodes.size(); ++ei) {
        const int d = other.cases[ci].episodes[ei].motions -
                      base.cases[ci].episodes[ei].motions;
        sum += d;
        ++n;
        if (d < 0)
          diff.fewer++;
        else if (d > 0)
          diff.more++;
        else
          diff.equal++;
      }
    diff.mean_motion_diff = n > 0 ? sum / n : 0.0;
    report.diffs.push_back(diff);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Export

namespace {

json episode_json(const EpisodeResult& e) {
  json trace = json::array();
  for (const auto& t : e.trace)
    trace.push_back({{"step", t.step},
                     {"selected_label", t.selected_label},
                     {"provenance", t.provenance},
                     {"score", t.score},
                     {"outcome", t.outcome}});
  return {{"success", e.success}, {"motions", e.motions},  {"trace", trace},
          {"seed", e.seed},       {"config_id", e.config_id}};
}

json metrics_json(const SuiteMetrics& m) {
  json j;
  j["task_success_rate"] = m.task_success_rate;
  if (m.motion_number)
    j["motion_number"] = *m.motion_number;
  else
    j["motion_number"] = nullptr;
  j["mean_steps_all"] = m.mean_steps_all;
  j["n_runs"] = m.n_runs;
  return j;
}

json case_json(const CaseResult& c) {
  json episodes = json::array();
  for (const auto& e : c.episodes) episodes.push_back(episode_json(e));
  return {{"config_id", c.config_id},
          {"episodes", episodes},
          {"metrics", metrics_json(c.metrics)}};
}

std::string fmt3(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << v;
  return out.str();
}

std::string table_for(const std::vector<std::string>& names,
                      const std::vector<SuiteMetrics>& metrics) {
  std::vector<std::string> rows = {"Average Success", "Average Step",
                                   "Average Success Step"};
  std::size_t head = std::string("Metric").size();
  for (const auto& r : rows) head = std::max(head, r.size());

  std::ostringstream out;
  out << std::left << std::setw(int(head) + 2) << "Metric";
  for (const auto& n : names) out << std::setw(14) << n;
  out << "\n";
  for (int row = 0; row < 3; ++row) {
    out << std::left << std::setw(int(head) + 2) << rows[std::size_t(row)];
    for (const auto& m : metrics) {
      std::string cell;
      if (row == 0)
        cell = fmt3(m.task_success_rate);
      else if (row == 1)
        cell = fmt3(m.mean_steps_all);
      else
        cell = m.motion_number ? fmt3(*m.motion_number) : "NA";
      out << std::setw(14) << cell;
    }
    out << "\n";
  }
  return out.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileFormatError("cannot open for writing: " + path);
  out << text;
}

}  // namespace

std::string results_to_json(const std::vector<CaseResult>& results) {
  json j;
  j["schema_version"] = 1;
  json cases = json::array();
  for (const auto& c : results) cases.push_back(case_json(c));
  j["cases"] = cases;
  return j.dump(2) + "\n";
}

std::string compare_to_json(const CompareReport& report) {
  json j;
  j["schema_version"] = 1;
  json policies = json::array();
  for (const auto& p : report.policies) {
    json cases = json::array();
    for (const auto& c : p.cases) cases.push_back(case_json(c));
    policies.push_back(
        {{"name", p.policy}, {"cases", cases}, {"overall", metrics_json(p.overall)}});
  }
  j["policies"] = policies;
  json diffs = json::array();
  for (const auto& d : report.diffs)
    diffs.push_back({{"policy", d.policy},
                     {"baseline", report.policies.front().policy},
                     {"mean_motion_diff", d.mean_motion_diff},
                     {"fewer", d.fewer},
                     {"more", d.more},
                     {"equal", d.equal}});
  j["paired_diffs"] = diffs;
  return j.dump(2) + "\n";
}

std::string metrics_table(const CompareReport& report) {
  std::vector<std::string> names;
  std::vector<SuiteMetrics> metrics;
  for (const auto& p : report.policies) {
    names.push_back(p.policy);
    metrics.push_back(p.overall);
  }
  return table_for(names, metrics);
}

std::string metrics_table(const std::vector<CaseResult>& results) {
  std::vector<std::string> names;
  std::vector<SuiteMetrics> metrics;
  for (const auto& c : results) {
    names.push_back(c.config_id);
    metrics.push_back(c.metrics);
  }
  return table_for(names, metrics);
}

void export_results(const std::vector<CaseResult>& results, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir + "/results.json", results_to_json(results));
  write_text(dir + "/table.txt", metrics_table(results));
}

void export_results(const CompareReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir + "/results.json", compare_to_json(report));
  write_text(dir + "/table.txt", metrics_table(report));
}

}  // namespace thinkgrasp
