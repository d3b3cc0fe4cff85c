// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "thinkgrasp/bench.hpp"
#include "thinkgrasp/errors.hpp"
#include "thinkgrasp/grasp.hpp"
#include "thinkgrasp/perception.hpp"

namespace {

using namespace thinkgrasp;
using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileFormatError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FileFormatError(path + ": " + e.what());
  }
  return j;
}

SceneConfig parse_scene_config(const json& j) {
  SceneConfig c;
  c.n_objects = j.at("n_objects").get<int>();
  const std::string level = j.value("clutter_level", "light");
  c.clutter_level = level == "heavy" ? ClutterLevel::Heavy : ClutterLevel::Light;
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

int cmd_gen_scene(const std::string& config_path, std::uint64_t seed,
                  const std::string& out_path, const std::string& preview) {
  const SceneConfig config = parse_scene_config(read_json_file(config_path));
  const Scene scene = generate_scene(config, seed);
  save_scene(scene, out_path);
  std::cout << "scene with " << scene.objects.size() << " objects -> " << out_path
            << "\n";
  if (!preview.empty()) {
    const Observation obs = render(scene, default_camera(scene.workspace));
    export_observation_png(obs, preview + ".rgb.png", preview + ".depth.png");
    std::cout << "preview -> " << preview << ".rgb.png / .depth.png\n";
  }
  return 0;
}

int cmd_run(const std::string& scene_path, const std::string& goal_text,
            const std::string& selector, const std::string& endpoint, int max_steps,
            const std::vector<std::string>& ablations, std::uint64_t seed,
            const std::string& out_path) {
  const Scene scene = load_scene(scene_path);
  const GoalSpec goal = goal_from_instruction(goal_text);

  EpisodeConfig config;
  config.max_steps = max_steps;
  if (selector == "scripted")
    config.selector_kind = SelectorKind::Scripted;
  else if (selector == "remote")
    config.selector_kind = SelectorKind::Remote;
  else if (selector == "random")
    config.selector_kind = SelectorKind::Random;
  else
    throw FileFormatError("unknown selector: " + selector);
  config.endpoint = endpoint;
  for (const auto& a : ablations) {
    if (a == "no_grid")
      config.ablation.no_grid = true;
    else if (a == "crop_only")
      config.ablation.crop_only = true;
    else if (a == "no_selector")
      config.ablation.no_selector = true;
    else
      throw FileFormatError("unknown ablation flag: " + a);
  }

  EpisodeResult result = run_episode(scene, goal, config, seed);
  result.config_id = "run";

  CaseResult cr;
  cr.config_id = "run";
  cr.episodes = {result};
  cr.metrics = aggregate(cr.episodes);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw FileFormatError("cannot open for writing: " + out_path);
    out << results_to_json({cr});
  }
  std::cout << (result.success ? "success" : "failure") << " in " << result.motions
            << " motion(s)\n";
  for (const auto& t : result.trace)
    std::cout << "  step " << t.step << ": " << (t.selected_label.empty() ? "-" : t.selected_label)
              << " [" << t.provenance << "] -> " << t.outcome << "\n";
  return result.success ? 0 : 1;
}

int cmd_bench(const std::string& suite_path, const std::string& out_dir) {
  const Suite suite = load_suite(suite_path);
  if (!suite.policies.empty()) {
    const CompareReport report = compare_policies(suite, suite.policies);
    export_results(report, out_dir);
    std::cout << metrics_table(report);
  } else {
    const auto results = run_benchmark(suite);
    export_results(results, out_dir);
    std::cout << metrics_table(results);
  }
  std::cout << "results -> " << out_dir << "/results.json\n";
  return 0;
}

int cmd_score(const std::string& cloud_path) {
  const json j = read_json_file(cloud_path);
  const auto& jc = j.at("contacts");
  auto vec = [](const json& a) { return Vec3(a.at(0), a.at(1), a.at(2)); };

  ContactPair pair;
  pair.p1 = vec(jc.at("p1"));
  pair.p2 = vec(jc.at("p2"));
  if (jc.contains("n1") && jc.contains("n2")) {
    pair.n1 = vec(jc.at("n1")).normalized();
    pair.n2 = vec(jc.at("n2")).normalized();
  } else {
    // estimate normals from the stored cloud and use the nearest points'
    PointCloud cloud;
    for (const auto& p : j.at("points")) cloud.points.push_back(vec(p));
    if (j.contains("view_origin")) cloud.view_origin = vec(j["view_origin"]);
    if (cloud.size() < 3) throw FileFormatError("cloud too small to estimate normals");
    const int k = std::min<int>(16, int(cloud.size()));
    const PointCloud with_normals = estimate_normals(cloud, k);
    auto nearest_normal = [&](const Vec3& p) {
      double best = 1e30;
      Vec3 n(0, 0, 1);
      bool found = false;
      for (std::size_t i = 0; i < with_normals.size(); ++i) {
        if (!with_normals.has_normal[i]) continue;
        const double d = (with_normals.points[i] - p).squaredNorm();
        if (d < best) {
          best = d;
          n = with_normals.normals[i];
          found = true;
        }
      }
      if (!found) throw FileFormatError("no usable normals near the contacts");
      return n;
    };
    pair.n1 = nearest_normal(pair.p1);
    pair.n2 = nearest_normal(pair.p2);
  }

  json out;
  try {
    const double s = force_closure_score(pair);
    out["score"] = s;
    out["mu_min"] = 1.1 - s;
  } catch (const NoScoreError& e) {
    out["score"] = nullptr;
    out["reason"] = e.what();
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thinkgrasp: language-conditioned grasp planning on a deterministic "
               "clutter simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path, preview;
  std::uint64_t seed = 0;
  auto* gen = app.add_subcommand("gen-scene", "Generate a cluttered scene");
  gen->add_option("--config", config_path, "clutter config JSON")->required();
  gen->add_option("--seed", seed, "RNG seed")->required();
  gen->add_option("--out", out_path, "output scene file")->required();
  gen->add_option("--preview", preview, "write PREFIX.rgb.png / PREFIX.depth.png");

  std::string scene_path, goal_text, selector = "scripted", endpoint;
  int max_steps = 15;
  std::vector<std::string> ablations;
  std::string run_out;
  std::uint64_t run_seed = 0;
  auto* run = app.add_subcommand("run", "Run one closed-loop episode");
  run->add_option("--scene", scene_path, "scene file")->required();
  run->add_option("--goal", goal_text, "instruction text")->required();
  run->add_option("--selector", selector, "scripted|remote|random");
  run->add_option("--endpoint", endpoint, "remote selector URL")
      ->envname("THINKGRASP_ENDPOINT");
  run->add_option("--max-steps", max_steps, "motion budget");
  run->add_option("--ablation", ablations, "no_grid|crop_only|no_selector")
      ->allow_extra_args(false);
  run->add_option("--seed", run_seed, "episode seed");
  run->add_option("--out", run_out, "write episode results JSON");

  std::string suite_path, bench_out;
  auto* bench = app.add_subcommand("bench", "Run a benchmark suite");
  bench->add_option("--suite", suite_path, "suite file")->required();
  bench->add_option("--out", bench_out, "output directory")->required();

  std::string cloud_path;
  auto* score = app.add_subcommand("score", "Friction-sweep score for a stored contact pair");
  score->add_option("--cloud", cloud_path, "cloud + contacts JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_scene(config_path, seed, out_path, preview);
    if (run->parsed())
      return cmd_run(scene_path, goal_text, selector, endpoint, max_steps, ablations,
                     run_seed, run_out);
    if (bench->parsed()) return cmd_bench(suite_path, bench_out);
    if (score->parsed()) return cmd_score(cloud_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
