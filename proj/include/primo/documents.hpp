#pragma once

// JSON documents exchanged with the viewer and between CLI commands:
// scenes, replay reports, schedules and analysis reports. Every document
// carries "primo_schema": 1.

#include "primo/analysis.hpp"
#include "primo/mesh_io.hpp"
#include "primo/study.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace primo {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

struct SceneDocument {
    std::uint64_t seed = 0;
    NavConfig nav;
    std::optional<LatticeSpec> lattice;  // absent for ingested meshes
    std::shared_ptr<const SessionObject> object;
    TrialSpec trial;
    std::optional<Question> q2;

    const DefectRegion& target() const;
    TrialContext trial_context() const { return {trial, object, q2}; }
};

struct GenerateOptions {
    std::uint64_t seed = 1;
    int depth = 3;
    int defects = 4;
    LatticeSpec lattice;
    NavStyle style = NavStyle::Structured;
    DisplayMode display = DisplayMode::Selection;
    int target = 1;
    Measure measure = Measure::Time;
    // When set, replaces the lattice.
    std::optional<LoadedMesh> mesh;
};

// Throws DomainError on capacity or target problems, ContractError on invalid options.
SceneDocument generate_scene(const GenerateOptions& options);

// Scene for one trial of a participant's generated schedule.
SceneDocument scene_for_trial(const TrialSpec& trial, int depth, const LatticeSpec& lattice);

Json scene_to_json(const SceneDocument& scene);
// `base_dir` resolves a relative "mesh_path". Throws SchemaError.
SceneDocument scene_from_json(const Json& doc, const std::filesystem::path& base_dir = {});

std::string_view to_string(NavStyle s);
std::string_view to_string(DisplayMode d);
std::string_view to_string(Measure m);
std::string_view to_string(Phase p);

Json question_to_json(const Question& q);
Json nav_state_to_json(const NavState& state);

// Metrics and final-state summary printed by `replay`.
Json replay_report(const SceneDocument& scene, const TrialOutcome& outcome);

struct AgentResult {
    EventLog log;
    TrialOutcome outcome;
};

// Ideal operator for the scene's style: sets the clip plane through the
// target, then descends. STRUCTURED aims at every level; UNSTRUCTURED aims
// once and only confirms afterwards.
AgentResult run_agent(const SceneDocument& scene, std::int64_t action_interval_ms = 250);

Json schedule_to_json(const std::vector<ParticipantSchedule>& schedules, std::uint64_t master_seed, bool with_trials);

struct AnalysisReport {
    Json report;
    std::string table;  // plain-text layout: one block per measure
};

// Input: replay reports. Builds a 2x2 table per measure and runs anova_2x2.
AnalysisReport analyze_reports(const std::vector<Json>& reports);

// Throws SchemaError unless `doc` is an object with the current schema version.
void require_schema(const Json& doc, const char* what);

}  // namespace primo
