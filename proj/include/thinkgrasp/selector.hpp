// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "thinkgrasp/perception.hpp"

namespace thinkgrasp {

struct SelectorRequest {
  std::vector<std::array<std::uint8_t, 3>> rgb;  // W*H
  int width = 224, height = 224;
  std::string instruction;
  int step_index = 0;
  std::vector<std::pair<std::string, std::string>> history;  // (target, outcome)
};

struct ObjectProperty {
  std::string color_name;      // e.g. "green bottle"
  int grasping_score = 0;      // 0..100
  int preferred_location = 5;  // 1..9, row-major grid cell
};

enum class SelectionKind { Object, Part };

struct SelectorResponse {
  SelectionKind kind = SelectionKind::Object;
  std::string selected;  // "green bottle", "black knife handle", ...
  PixelBox crop_box;
  std::vector<ObjectProperty> properties;

  const ObjectProperty& selected_property() const;
};

/// The instruction-conditioned prompt template sent to a vision-language
/// selector. Byte-stable for a fixed request.
std::string build_prompt(const SelectorRequest& request);

/// Tolerant line-oriented parse of the selector output format. Accepts the
/// preferred location as a digit 1-9 or as one of the nine position words
/// (top-left .. bottom-right, row-major). Throws ParseError on a missing
/// selected line, an unparsable crop box, or out-of-range numbers.
SelectorResponse parse_response(const std::string& text);

/// Canonical text form of a response; parse_response(format_response(r))
/// reproduces r field-for-field.
std::string format_response(const SelectorResponse& response);

/// Enforce the response invariants (crop box sane, ranges, selected listed
/// among properties). Throws ParseError describing the first violation.
void validate_response(const SelectorResponse& response);

struct ScriptedParams {
  double v_min = 0.15;     // visible fraction above which the goal is taken
  bool goal_only = false;  // no-selector ablation: only ever pick the goal
};

/// Deterministic ground-truth-backed stand-in for the vision-language
/// selection stage: pick the goal when visible enough, otherwise the
/// occluder most worth removing (visible area x image centrality,
/// restricted to occluders over the goal's footprint when possible).
SelectorResponse scripted_select(const Observation& obs, const GoalSpec& goal,
                                 const Scene& scene, const ScriptedParams& params = {});

/// Baseline selector: uniform choice among visible objects. Deterministic
/// in seed.
SelectorResponse random_select(const Observation& obs, const Scene& scene,
                               std::uint64_t seed);

struct RemotePolicy {
  double timeout_s = 30.0;
  int max_retries = 2;
};

/// POST the request to `endpoint` (HTTP, path /v1/select) and parse the
/// returned raw text. Retries on timeout or parse failure; nullopt after
/// exhaustion signals the planner to fall back to scripted selection.
std::optional<SelectorResponse> remote_select(const SelectorRequest& request,
                                              const std::string& endpoint,
                                              const RemotePolicy& policy = {});

}  // namespace thinkgrasp
