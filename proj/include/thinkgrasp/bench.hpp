// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thinkgrasp/planner.hpp"
#include "thinkgrasp/scene.hpp"

namespace thinkgrasp {

struct SuiteMetrics {
  double task_success_rate = 0.0;
  std::optional<double> motion_number;  // mean motions over successes
  double mean_steps_all = 0.0;
  int n_runs = 0;
};

SuiteMetrics aggregate(const std::vector<EpisodeResult>& episodes);

// ---------------------------------------------------------------------------
// Scene persistence (JSON, schema_version 1)

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);
void save_scene(const Scene& scene, const std::string& path);
Scene load_scene(const std::string& path);

// ---------------------------------------------------------------------------
// Suites

struct SuiteCase {
  std::string config_id;
  SceneConfig scene_config;
  GoalSpec goal;
  EpisodeConfig episode;
  std::vector<std::uint64_t> seeds;
};

struct Suite {
  std::vector<SuiteCase> cases;
  /// Optional policy overlays: when non-empty, `bench` runs every policy
  /// over every case on identical scenes/seeds (paired comparison).
  std::vector<std::pair<std::string, EpisodeConfig>> policies;
};

Suite suite_from_json(const std::string& text);
Suite load_suite(const std::string& path);

struct CaseResult {
  std::string config_id;
  std::vector<EpisodeResult> episodes;  // in seed order
  SuiteMetrics metrics;
};

/// Run every case `runs_per_case` times (seed list repeated/truncated as
/// given). Episode errors count as failures, never abort the suite.
std::vector<CaseResult> run_benchmark(const Suite& suite, int runs_per_case = 1);

struct PairedDiff {
  std::string policy;         // compared against the first policy
  double mean_motion_diff = 0.0;  // this policy - baseline, mean over seeds
  int fewer = 0;              // seeds with strictly fewer motions
  int more = 0;
  int equal = 0;
};

struct PolicyReport {
  std::string policy;
  std::vector<CaseResult> cases;
  SuiteMetrics overall;
};

struct CompareReport {
  std::vector<PolicyReport> policies;
  std::vector<PairedDiff> diffs;  // one per non-baseline policy
};

/// Run all policies over the same cases and seeds; the first policy is the
/// baseline for the paired per-seed motion differences.
CompareReport compare_policies(const Suite& suite,
                               const std::vector<std::pair<std::string, EpisodeConfig>>& policies);

// ---------------------------------------------------------------------------
// Export

std::string results_to_json(const std::vector<CaseResult>& results);
std::string compare_to_json(const CompareReport& report);

/// Plain-text table with the three headline rows per policy:
/// Average Success, Average Step, Average Success Step.
std::string metrics_table(const CompareReport& report);
std::string metrics_table(const std::vector<CaseResult>& results);

/// Write results.json (and table.txt) into `dir`. Deterministic: identical
/// inputs produce byte-identical files.
void export_results(const std::vector<CaseResult>& results, const std::string& dir);
void export_results(const CompareReport& report, const std::string& dir);

}  // namespace thinkgrasp
