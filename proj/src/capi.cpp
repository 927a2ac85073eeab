#include "primo/primo.h"

#include "primo/documents.hpp"
#include "primo/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>

struct primo_scene {
    primo::SceneDocument doc;
};

struct primo_session {
    primo::SceneDocument scene;
    primo::TrialRunner runner;
    std::int64_t clock_ms = 0;
};

namespace {

thread_local std::string g_last_error;

primo_status fail(primo_status status, std::string message) {
    g_last_error = std::move(message);
    return status;
}

// Maps the core's exception taxonomy onto status codes.
template <class Fn>
primo_status guarded(Fn&& fn) noexcept {
    g_last_error.clear();
    try {
        return fn();
    } catch (const primo::ParseError& e) {
        return fail(PRIMO_ERROR_USAGE, std::string(e.what()) + " (at " + std::to_string(e.location()) + ")");
    } catch (const primo::SchemaError& e) {
        return fail(PRIMO_ERROR_USAGE, e.what());
    } catch (const primo::ContractError& e) {
        return fail(PRIMO_ERROR_USAGE, e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(PRIMO_ERROR_USAGE, e.what());
    } catch (const primo::DomainError& e) {
        return fail(PRIMO_ERROR_DOMAIN, e.what());
    } catch (const primo::OutOfBoundsError& e) {
        return fail(PRIMO_ERROR_DOMAIN, e.what());
    } catch (const primo::InvariantError& e) {
        return fail(PRIMO_ERROR_INTERNAL, std::string("invariant breach: ") + e.what());
    } catch (const std::bad_alloc&) {
        return fail(PRIMO_ERROR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(PRIMO_ERROR_INTERNAL, e.what());
    } catch (...) {
        return fail(PRIMO_ERROR_INTERNAL, "unknown failure");
    }
}

char* duplicate(const std::string& text) {
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, text.data(), text.size() + 1);
    return out;
}

void require(bool condition, const char* message) {
    if (!condition) throw primo::ContractError(message);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw primo::SchemaError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

primo::Json parse_json(const char* text, std::size_t length, const char* what) {
    try {
        return primo::Json::parse(text, text + length);
    } catch (const nlohmann::json::parse_error& e) {
        throw primo::SchemaError(std::string(what) + ": invalid JSON (" + e.what() + ")");
    }
}

primo::LatticeSpec lattice_from(const primo_generate_options& o) {
    primo::LatticeSpec spec;
    spec.cells_per_axis = o.lattice_cells;
    spec.strut_thickness = o.strut_thickness;
    spec.pattern = o.pattern == PRIMO_GYROID_APPROX ? primo::LatticePattern::GyroidApprox : primo::LatticePattern::GridStruts;
    spec.gyroid_resolution = o.gyroid_resolution;
    return spec;
}

primo::Json session_state(const primo_session& s) {
    primo::Json state = primo::nav_state_to_json(s.runner.state());
    const primo::TrialOutcome& outcome = s.runner.outcome();
    state["t"] = s.clock_ms;
    state["gate_open"] = s.runner.gate_open();
    state["completed"] = outcome.completed;
    state["target"] = s.runner.target().id;
    state["q1"] = outcome.q1 ? primo::question_to_json(*outcome.q1) : primo::Json(nullptr);
    return state;
}

}  // namespace

extern "C" {

const char* primo_version(void) { return "1.0.0"; }

const char* primo_last_error(void) { return g_last_error.c_str(); }

void primo_string_free(char* text) { std::free(text); }

primo_generate_options primo_generate_options_default(void) {
    const primo::GenerateOptions d;
    primo_generate_options o{};
    o.seed = d.seed;
    o.depth = d.depth;
    o.defects = d.defects;
    o.lattice_cells = d.lattice.cells_per_axis;
    o.strut_thickness = d.lattice.strut_thickness;
    o.pattern = PRIMO_GRID_STRUTS;
    o.gyroid_resolution = d.lattice.gyroid_resolution;
    o.style = PRIMO_STRUCTURED;
    o.display = PRIMO_SELECTION;
    o.target = d.target;
    o.measure = PRIMO_TIME;
    o.mesh_path = nullptr;
    o.participant = -1;
    o.trial_index = 0;
    o.master_seed = 1;
    return o;
}

primo_status primo_scene_generate(const primo_generate_options* options, primo_scene** out) {
    return guarded([&] {
        require(options && out, "primo_scene_generate: null argument");
        *out = nullptr;
        const primo_generate_options& o = *options;
        if (o.participant >= 0) {
            require(o.trial_index >= 0 && o.trial_index < primo::kTrialsPerParticipant,
                    "trial index must lie in 0..79");
            require(!o.mesh_path, "scheduled trials use generated lattices");
            const auto schedules = primo::build_schedule((o.participant / 4 + 1) * 4);
            const auto trials = primo::build_trials(schedules[static_cast<std::size_t>(o.participant)], o.master_seed);
            auto scene = std::make_unique<primo_scene>();
            scene->doc = primo::scene_for_trial(trials[static_cast<std::size_t>(o.trial_index)], o.depth, lattice_from(o));
            *out = scene.release();
            return PRIMO_OK;
        }
        primo::GenerateOptions g;
        g.seed = o.seed;
        g.depth = o.depth;
        g.defects = o.defects;
        g.lattice = lattice_from(o);
        g.style = o.style == PRIMO_UNSTRUCTURED ? primo::NavStyle::Unstructured : primo::NavStyle::Structured;
        g.display = o.display == PRIMO_EVERYTHING ? primo::DisplayMode::Everything : primo::DisplayMode::Selection;
        g.target = o.target;
        g.measure = o.measure == PRIMO_AWARENESS ? primo::Measure::Awareness : primo::Measure::Time;
        if (o.mesh_path) {
            const std::string bytes = read_file(o.mesh_path);
            const auto span = std::as_bytes(std::span<const char>(bytes.data(), bytes.size()));
            const auto format = primo::detect_mesh_format(o.mesh_path, span);
            if (!format) throw primo::SchemaError(std::string("unrecognized mesh format: ") + o.mesh_path);
            g.mesh = primo::load_mesh(span, *format);
        }
        auto scene = std::make_unique<primo_scene>();
        scene->doc = primo::generate_scene(g);
        *out = scene.release();
        return PRIMO_OK;
    });
}

primo_status primo_scene_from_json(const char* json, size_t length, const char* base_dir, primo_scene** out) {
    return guarded([&] {
        require(json && out, "primo_scene_from_json: null argument");
        *out = nullptr;
        auto scene = std::make_unique<primo_scene>();
        scene->doc = primo::scene_from_json(parse_json(json, length, "scene"),
                                            base_dir ? std::filesystem::path(base_dir) : std::filesystem::path());
        *out = scene.release();
        return PRIMO_OK;
    });
}

primo_status primo_scene_load_file(const char* path, primo_scene** out) {
    return guarded([&] {
        require(path && out, "primo_scene_load_file: null argument");
        *out = nullptr;
        const std::string text = read_file(path);
        auto scene = std::make_unique<primo_scene>();
        scene->doc = primo::scene_from_json(parse_json(text.data(), text.size(), path),
                                            std::filesystem::path(path).parent_path());
        *out = scene.release();
        return PRIMO_OK;
    });
}

primo_status primo_scene_to_json(const primo_scene* scene, int indent, char** out) {
    return guarded([&] {
        require(scene && out, "primo_scene_to_json: null argument");
        *out = duplicate(primo::scene_to_json(scene->doc).dump(indent));
        return PRIMO_OK;
    });
}

primo_status primo_scene_export_obj(const primo_scene* scene, char** out) {
    return guarded([&] {
        require(scene && out, "primo_scene_export_obj: null argument");
        *out = duplicate(primo::write_obj(scene->doc.object->mesh));
        return PRIMO_OK;
    });
}

primo_status primo_scene_max_depth(const primo_scene* scene, int* out) {
    return guarded([&] {
        require(scene && out, "primo_scene_max_depth: null argument");
        *out = scene->doc.nav.max_depth;
        return PRIMO_OK;
    });
}

void primo_scene_free(primo_scene* scene) { delete scene; }

primo_status primo_replay(const primo_scene* scene, const char* log, size_t length, char** out_report) {
    return guarded([&] {
        require(scene && (log || length == 0) && out_report, "primo_replay: null argument");
        *out_report = nullptr;
        const primo::EventLog events = primo::parse_jsonl(std::string_view(log ? log : "", length));
        const primo::TrialOutcome outcome = primo::run_trial(scene->doc.trial_context(), events, scene->doc.nav);
        *out_report = duplicate(primo::replay_report(scene->doc, outcome).dump());
        return outcome.completed ? PRIMO_OK : PRIMO_INCOMPLETE;
    });
}

primo_status primo_agent(const primo_scene* scene, char** out_log, char** out_report) {
    return guarded([&] {
        require(scene, "primo_agent: null scene");
        if (out_log) *out_log = nullptr;
        if (out_report) *out_report = nullptr;
        const primo::AgentResult result = primo::run_agent(scene->doc);
        // Closure: the synthesized log must replay to the same outcome.
        const primo::TrialOutcome replayed = primo::run_trial(scene->doc.trial_context(), result.log, scene->doc.nav);
        if (!replayed.completed || replayed.metrics != result.outcome.metrics) {
            throw primo::InvariantError("agent log does not replay to the agent's outcome");
        }
        std::string log = primo::to_jsonl(result.log);
        std::string report = primo::replay_report(scene->doc, result.outcome).dump();
        if (out_log) *out_log = duplicate(log);
        if (out_report) {
            try {
                *out_report = duplicate(report);
            } catch (...) {
                if (out_log) {
                    std::free(*out_log);
                    *out_log = nullptr;
                }
                throw;
            }
        }
        return PRIMO_OK;
    });
}

primo_status primo_schedule_json(int n, uint64_t master_seed, int with_trials, char** out) {
    return guarded([&] {
        require(out, "primo_schedule_json: null argument");
        *out = nullptr;
        const auto schedules = primo::build_schedule(n);
        *out = duplicate(primo::schedule_to_json(schedules, master_seed, with_trials != 0).dump());
        return PRIMO_OK;
    });
}

primo_status primo_analyze_json(const char* const* reports, size_t count, char** out_report, char** out_table) {
    return guarded([&] {
        require(out_report && (reports || count == 0), "primo_analyze_json: null argument");
        *out_report = nullptr;
        if (out_table) *out_table = nullptr;
        std::vector<primo::Json> docs;
        docs.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            require(reports[i] != nullptr, "primo_analyze_json: null report");
            docs.push_back(parse_json(reports[i], std::strlen(reports[i]), "report"));
        }
        const primo::AnalysisReport analysis = primo::analyze_reports(docs);
        std::string report = analysis.report.dump();
        *out_report = duplicate(report);
        if (out_table) *out_table = duplicate(analysis.table);
        return PRIMO_OK;
    });
}

primo_status primo_session_create(const primo_scene* scene, primo_session** out) {
    return guarded([&] {
        require(scene && out, "primo_session_create: null argument");
        *out = new primo_session{scene->doc, primo::TrialRunner(scene->doc.trial_context(), scene->doc.nav), 0};
        return PRIMO_OK;
    });
}

primo_status primo_session_apply(primo_session* session, const char* request, size_t length, char** out_response) {
    return guarded([&] {
        require(session && request && out_response, "primo_session_apply: null argument");
        *out_response = nullptr;
        const primo::Json req = parse_json(request, length, "request");
        if (!req.is_object() || !req.contains("op") || !req["op"].is_string()) {
            throw primo::SchemaError("request needs a string 'op'");
        }
        const std::string op = req["op"].get<std::string>();
        primo::Json response;

        if (op == "log") {
            response["log"] = primo::to_jsonl(session->runner.outcome().annotated);
        } else if (op != "state") {
            static const std::array<std::string, 6> allowed{"aim", "confirm", "ascend", "clip", "tick", "answer"};
            if (std::find(allowed.begin(), allowed.end(), op) == allowed.end()) {
                throw primo::SchemaError("unknown op '" + op + "'");
            }
            std::int64_t t = session->clock_ms;
            if (const auto it = req.find("t"); it != req.end()) {
                if (!it->is_number_integer()) throw primo::SchemaError("'t' must be integer ms");
                t = it->get<std::int64_t>();
            }
            // Events share the session-log schema, so parse them through it.
            primo::Json line{{"t", t}, {"e", op}, {"data", req.value("data", primo::Json::object())}};
            primo::LogEntry entry = primo::parse_jsonl_line(line.dump(), session->runner.applied());
            if (const auto* tick = std::get_if<primo::TickEvent>(&entry.event); tick && !req.contains("t")) {
                entry.t_ms = session->clock_ms + static_cast<std::int64_t>(std::llround(tick->dt_ms));
            }
            const std::vector<primo::LogEntry> derived = session->runner.apply(entry);
            session->clock_ms = entry.t_ms;
            primo::Json rejection = nullptr;
            primo::Json derived_json = primo::Json::array();
            for (const auto& d : derived) {
                derived_json.push_back(primo::Json::parse(primo::to_jsonl_line(d)));
                if (const auto* r = std::get_if<primo::RejectEvent>(&d.event)) rejection = r->reason;
            }
            response["rejection"] = std::move(rejection);
            response["derived"] = std::move(derived_json);
        }
        response["state"] = session_state(*session);
        *out_response = duplicate(response.dump());
        return PRIMO_OK;
    });
}

primo_status primo_session_state_json(const primo_session* session, char** out) {
    return guarded([&] {
        require(session && out, "primo_session_state_json: null argument");
        *out = duplicate(session_state(*session).dump());
        return PRIMO_OK;
    });
}

void primo_session_free(primo_session* session) { delete session; }

}  // extern "C"
