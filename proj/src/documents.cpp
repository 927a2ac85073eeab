#include "primo/documents.hpp"

#include "primo/errors.hpp"
#include "primo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace primo {

namespace {

Json vec_json(Vec3 v) { return Json::array({v.x, v.y, v.z}); }

Json box_json(const Aabb& box) { return Json{{"min", vec_json(box.min)}, {"max", vec_json(box.max)}}; }

[[noreturn]] void schema_fail(const std::string& what) { throw SchemaError(what); }

const Json& member(const Json& doc, const char* name) {
    if (!doc.is_object()) schema_fail(std::string("expected an object holding '") + name + "'");
    const auto it = doc.find(name);
    if (it == doc.end()) schema_fail(std::string("missing field '") + name + "'");
    return *it;
}

double real_at(const Json& doc, const char* name) {
    const Json& v = member(doc, name);
    if (!v.is_number()) schema_fail(std::string("field '") + name + "' must be a number");
    return v.get<double>();
}

std::int64_t int_at(const Json& doc, const char* name) {
    const Json& v = member(doc, name);
    if (!v.is_number_integer()) schema_fail(std::string("field '") + name + "' must be an integer");
    return v.get<std::int64_t>();
}

std::uint64_t uint_at(const Json& doc, const char* name) {
    const Json& v = member(doc, name);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        schema_fail(std::string("field '") + name + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::string string_at(const Json& doc, const char* name) {
    const Json& v = member(doc, name);
    if (!v.is_string()) schema_fail(std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

Vec3 vec_at(const Json& doc, const char* name) {
    const Json& v = member(doc, name);
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
        schema_fail(std::string("field '") + name + "' must be [x,y,z]");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

NavStyle parse_style(const std::string& s) {
    if (s == "structured") return NavStyle::Structured;
    if (s == "unstructured") return NavStyle::Unstructured;
    schema_fail("unknown navigation style '" + s + "'");
}

DisplayMode parse_display(const std::string& s) {
    if (s == "selection") return DisplayMode::Selection;
    if (s == "everything") return DisplayMode::Everything;
    schema_fail("unknown display mode '" + s + "'");
}

Measure parse_measure(const std::string& s) {
    if (s == "time") return Measure::Time;
    if (s == "awareness") return Measure::Awareness;
    schema_fail("unknown measure '" + s + "'");
}

Phase parse_phase(const std::string& s) {
    if (s == "training") return Phase::Training;
    if (s == "main") return Phase::Main;
    schema_fail("unknown phase '" + s + "'");
}

std::string_view pattern_name(LatticePattern p) { return p == LatticePattern::GridStruts ? "grid-struts" : "gyroid-approx"; }

LatticePattern parse_pattern(const std::string& s) {
    if (s == "grid-struts") return LatticePattern::GridStruts;
    if (s == "gyroid-approx") return LatticePattern::GyroidApprox;
    schema_fail("unknown lattice pattern '" + s + "'");
}

Json nav_json(const NavConfig& c) {
    return Json{{"style", to_string(c.style)},
                {"display", to_string(c.display)},
                {"max_depth", c.max_depth},
                {"scale_factor", c.scale_factor},
                {"animation_ms", c.animation_ms}};
}

NavConfig nav_from(const Json& j) {
    NavConfig c;
    c.style = parse_style(string_at(j, "style"));
    c.display = parse_display(string_at(j, "display"));
    c.max_depth = static_cast<int>(int_at(j, "max_depth"));
    c.scale_factor = real_at(j, "scale_factor");
    c.animation_ms = real_at(j, "animation_ms");
    try {
        c.validate();
    } catch (const ContractError& e) {
        schema_fail(e.what());
    }
    return c;
}

Json mesh_json(const TriangleMesh& mesh) {
    Json vertices = Json::array();
    for (const Vec3& v : mesh.vertices) {
        vertices.push_back(v.x);
        vertices.push_back(v.y);
        vertices.push_back(v.z);
    }
    Json triangles = Json::array();
    for (const auto& t : mesh.triangles) {
        for (std::uint32_t i : t) triangles.push_back(i);
    }
    return Json{{"vertices", std::move(vertices)}, {"triangles", std::move(triangles)}};
}

TriangleMesh mesh_from(const Json& j) {
    const Json& vertices = member(j, "vertices");
    const Json& triangles = member(j, "triangles");
    if (!vertices.is_array() || vertices.size() % 3 != 0) schema_fail("mesh vertices must be a flat [x,y,z,...] array");
    if (!triangles.is_array() || triangles.size() % 3 != 0) schema_fail("mesh triangles must be a flat [i,j,k,...] array");
    TriangleMesh mesh;
    mesh.vertices.reserve(vertices.size() / 3);
    for (std::size_t i = 0; i < vertices.size(); i += 3) {
        for (std::size_t k = 0; k < 3; ++k) {
            if (!vertices[i + k].is_number()) schema_fail("mesh vertex coordinate is not a number");
        }
        mesh.vertices.push_back({vertices[i].get<double>(), vertices[i + 1].get<double>(), vertices[i + 2].get<double>()});
    }
    mesh.triangles.reserve(triangles.size() / 3);
    for (std::size_t i = 0; i < triangles.size(); i += 3) {
        TriangleMesh::Triangle t;
        for (std::size_t k = 0; k < 3; ++k) {
            if (!triangles[i + k].is_number_unsigned()) schema_fail("mesh triangle index must be a non-negative integer");
            t[k] = triangles[i + k].get<std::uint32_t>();
        }
        mesh.triangles.push_back(t);
    }
    if (!mesh.indices_valid()) schema_fail("mesh triangle index out of range");
    return mesh;
}

Json defect_json(const DefectRegion& d) {
    Json path = Json::array();
    for (OctantIndex o : d.cell_path) path.push_back(o.value());
    return Json{{"id", d.id}, {"center", vec_json(d.center)}, {"radius", d.radius}, {"cell_path", std::move(path)}};
}

DefectRegion defect_from(const Json& j) {
    DefectRegion d;
    d.id = static_cast<int>(int_at(j, "id"));
    d.center = vec_at(j, "center");
    d.radius = real_at(j, "radius");
    const Json& path = member(j, "cell_path");
    if (!path.is_array()) schema_fail("cell_path must be an array");
    for (const Json& o : path) {
        if (!o.is_number_integer() || o.get<int>() < 0 || o.get<int>() > 7) schema_fail("cell_path entries must be 0..7");
        d.cell_path.emplace_back(o.get<int>());
    }
    return d;
}

Json trial_json(const TrialSpec& t) {
    return Json{{"participant", t.participant},
                {"condition_position", t.condition_position},
                {"object_index", t.object_index},
                {"object_seed", t.object_seed},
                {"trial_seed", t.trial_seed},
                {"defect_index", t.defect_index},
                {"measure", to_string(t.measure)},
                {"phase", to_string(t.phase)}};
}

TrialSpec trial_from(const Json& j, const NavConfig& nav) {
    TrialSpec t;
    t.participant = static_cast<int>(int_at(j, "participant"));
    t.condition = Condition{nav.display, nav.style};
    t.condition_position = static_cast<int>(int_at(j, "condition_position"));
    t.object_index = static_cast<int>(int_at(j, "object_index"));
    t.object_seed = uint_at(j, "object_seed");
    t.trial_seed = uint_at(j, "trial_seed");
    t.defect_index = static_cast<int>(int_at(j, "defect_index"));
    t.measure = parse_measure(string_at(j, "measure"));
    t.phase = parse_phase(string_at(j, "phase"));
    return t;
}

Question question_from(const Json& j) {
    Question q;
    const std::string kind = string_at(j, "kind");
    if (kind == "q1") q.kind = QuestionKind::Q1Location;
    else if (kind == "q2") q.kind = QuestionKind::Q2Object;
    else schema_fail("unknown question kind '" + kind + "'");
    q.correct_index = static_cast<int>(int_at(j, "correct_index"));
    if (q.correct_index < 0 || q.correct_index > 3) schema_fail("correct_index must be 0..3");
    const Json& choices = member(j, "choices");
    if (!choices.is_array() || choices.size() != 4) schema_fail("a question has exactly 4 choices");
    for (std::size_t c = 0; c < 4; ++c) {
        if (!choices[c].is_array()) schema_fail("a choice is a list of [x,y,z] centers");
        for (const Json& p : choices[c]) {
            const Json wrapped{{"p", p}};
            q.choices[c].push_back(vec_at(wrapped, "p"));
        }
    }
    return q;
}

std::string format_real(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.4g", v);
    return buffer;
}

}  // namespace

void require_schema(const Json& doc, const char* what) {
    if (!doc.is_object()) throw SchemaError(std::string(what) + ": document is not a JSON object");
    const auto it = doc.find("primo_schema");
    if (it == doc.end() || !it->is_number_integer() || it->get<int>() != kSchemaVersion) {
        throw SchemaError(std::string(what) + ": expected \"primo_schema\":" + std::to_string(kSchemaVersion));
    }
}

std::string_view to_string(NavStyle s) { return s == NavStyle::Structured ? "structured" : "unstructured"; }
std::string_view to_string(DisplayMode d) { return d == DisplayMode::Selection ? "selection" : "everything"; }
std::string_view to_string(Measure m) { return m == Measure::Time ? "time" : "awareness"; }
std::string_view to_string(Phase p) { return p == Phase::Training ? "training" : "main"; }

const DefectRegion& SceneDocument::target() const {
    const int id = trial.target_id();
    for (const auto& d : object->defects) {
        if (d.id == id) return d;
    }
    throw DomainError("scene has no defect with id " + std::to_string(id));
}

//---------------------------------------------------------------------------//
// Scenes
//---------------------------------------------------------------------------//

SceneDocument generate_scene(const GenerateOptions& options) {
    if (options.depth < 1) throw ContractError("generate: depth must be >= 1");
    if (options.defects < 1) throw ContractError("generate: at least one defect is required");

    SceneDocument scene;
    scene.seed = options.seed;
    scene.nav.style = options.style;
    scene.nav.display = options.display;
    scene.nav.max_depth = options.depth;
    scene.nav.validate();

    auto object = std::make_shared<SessionObject>();
    object->defects = place_defects(options.seed, options.depth, options.defects);
    if (options.target < 1 || options.target > options.defects) {
        throw DomainError("generate: target " + std::to_string(options.target) + " is not a defect id (1.." +
                          std::to_string(options.defects) + ")");
    }
    if (options.mesh) {
        object->mesh = options.mesh->mesh;
    } else {
        scene.lattice = options.lattice;
        object->mesh = generate_lattice(options.lattice);
    }

    scene.trial.condition = Condition{options.display, options.style};
    scene.trial.object_seed = options.seed;
    scene.trial.defect_index = options.target - 1;
    scene.trial.trial_seed = derive_seed(options.seed, {static_cast<std::uint64_t>(options.target)});
    scene.trial.measure = options.measure;
    if (object->defects.size() == 4) scene.q2 = make_q2(object->defects, derive_seed(options.seed, {0x51'32}));
    scene.object = std::move(object);
    return scene;
}

SceneDocument scene_for_trial(const TrialSpec& trial, int depth, const LatticeSpec& lattice) {
    GenerateOptions options;
    options.seed = trial.object_seed;
    options.depth = depth;
    options.defects = 4;
    options.lattice = lattice;
    options.style = trial.condition.style;
    options.display = trial.condition.display;
    options.target = trial.target_id();
    options.measure = trial.measure;
    SceneDocument scene = generate_scene(options);
    scene.trial = trial;
    return scene;
}

Json scene_to_json(const SceneDocument& scene) {
    Json doc;
    doc["primo_schema"] = kSchemaVersion;
    doc["kind"] = "scene";
    doc["seed"] = scene.seed;
    doc["nav"] = nav_json(scene.nav);
    if (scene.lattice) {
        doc["lattice"] = Json{{"cells_per_axis", scene.lattice->cells_per_axis},
                              {"strut_thickness", scene.lattice->strut_thickness},
                              {"pattern", pattern_name(scene.lattice->pattern)},
                              {"gyroid_resolution", scene.lattice->gyroid_resolution}};
    } else {
        doc["lattice"] = nullptr;
    }
    doc["mesh"] = mesh_json(scene.object->mesh);
    Json defects = Json::array();
    for (const auto& d : scene.object->defects) defects.push_back(defect_json(d));
    doc["defects"] = std::move(defects);
    doc["target"] = scene.trial.target_id();
    Json rods = Json::array();
    for (const RodMarker& rod : rods_for_target(scene.target().center)) {
        const Segment span = rod.span();
        static constexpr std::array<const char*, 3> names{"x", "y", "z"};
        rods.push_back(Json{{"axis", names[static_cast<std::size_t>(rod.axis)]},
                            {"through", vec_json(rod.through)},
                            {"from", vec_json(span.a)},
                            {"to", vec_json(span.b)}});
    }
    doc["rods"] = std::move(rods);
    Json palette = Json::array();
    for (const Rgb& c : octant_colors()) palette.push_back(Json::array({c.r, c.g, c.b}));
    doc["palette"] = std::move(palette);
    doc["trial"] = trial_json(scene.trial);
    if (scene.q2) doc["q2"] = question_to_json(*scene.q2);
    return doc;
}

SceneDocument scene_from_json(const Json& doc, const std::filesystem::path& base_dir) {
    require_schema(doc, "scene");
    if (string_at(doc, "kind") != "scene") schema_fail("document kind is not 'scene'");

    SceneDocument scene;
    scene.seed = uint_at(doc, "seed");
    scene.nav = nav_from(member(doc, "nav"));
    if (const auto it = doc.find("lattice"); it != doc.end() && !it->is_null()) {
        LatticeSpec spec;
        spec.cells_per_axis = static_cast<int>(int_at(*it, "cells_per_axis"));
        spec.strut_thickness = real_at(*it, "strut_thickness");
        spec.pattern = parse_pattern(string_at(*it, "pattern"));
        spec.gyroid_resolution = static_cast<int>(int_at(*it, "gyroid_resolution"));
        scene.lattice = spec;
    }

    auto object = std::make_shared<SessionObject>();
    if (const auto it = doc.find("mesh"); it != doc.end()) {
        object->mesh = mesh_from(*it);
    } else if (const auto path_it = doc.find("mesh_path"); path_it != doc.end() && path_it->is_string()) {
        std::filesystem::path path = path_it->get<std::string>();
        if (path.is_relative()) path = base_dir / path;
        std::ifstream in(path, std::ios::binary);
        if (!in) schema_fail("cannot open mesh_path '" + path.string() + "'");
        const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        const auto span = std::as_bytes(std::span<const char>(bytes.data(), bytes.size()));
        const auto format = detect_mesh_format(path.string(), span);
        if (!format) schema_fail("unrecognized mesh format for '" + path.string() + "'");
        object->mesh = load_mesh(span, *format).mesh;
    } else {
        schema_fail("scene needs 'mesh' or 'mesh_path'");
    }

    const Json& defects = member(doc, "defects");
    if (!defects.is_array() || defects.empty()) schema_fail("scene needs a non-empty 'defects' array");
    for (const Json& d : defects) object->defects.push_back(defect_from(d));
    scene.object = std::move(object);

    scene.trial = trial_from(member(doc, "trial"), scene.nav);
    if (int_at(doc, "target") != scene.trial.target_id()) schema_fail("'target' disagrees with trial.defect_index");
    if (const auto it = doc.find("q2"); it != doc.end()) scene.q2 = question_from(*it);
    try {
        (void)scene.target();
    } catch (const DomainError& e) {
        schema_fail(e.what());
    }
    return scene;
}

Json question_to_json(const Question& q) {
    Json choices = Json::array();
    for (const auto& choice : q.choices) {
        Json points = Json::array();
        for (Vec3 p : choice) points.push_back(vec_json(p));
        choices.push_back(std::move(points));
    }
    return Json{{"kind", q.kind == QuestionKind::Q1Location ? "q1" : "q2"},
                {"choices", std::move(choices)},
                {"correct_index", q.correct_index}};
}

Json nav_state_to_json(const NavState& state) {
    Json stack = Json::array();
    for (const auto& frame : state.stack) {
        Json f = box_json(frame.box);
        if (const auto* octant = std::get_if<OctantIndex>(&frame.origin)) {
            f["octant"] = octant->value();
        } else {
            f["center"] = vec_json(std::get<Vec3>(frame.origin));
        }
        stack.push_back(std::move(f));
    }
    Json cursor = nullptr;
    if (state.cursor) {
        const AimResult& c = *state.cursor;
        cursor = Json{{"kind", c.kind == AimResult::Kind::OctantHighlight ? "octant" : "cube"}, {"valid", c.valid}};
        if (c.valid && c.kind == AimResult::Kind::OctantHighlight) {
            cursor["octant"] = c.octant.value();
            cursor["box"] = box_json(octant_aabb(state.focus(), c.octant));
        } else if (c.valid) {
            cursor["box"] = box_json(c.cube);
            cursor["aim_point"] = vec_json(c.aim_point);
        }
    }
    return Json{{"depth", state.depth()},
                {"focus", box_json(state.focus())},
                {"scale", state.transform.scale},
                {"translation", vec_json(state.transform.translation)},
                {"animating", state.animating()},
                {"clip", state.clip.height},
                {"cursor", std::move(cursor)},
                {"stack", std::move(stack)}};
}

Json replay_report(const SceneDocument& scene, const TrialOutcome& outcome) {
    Json doc;
    doc["primo_schema"] = kSchemaVersion;
    doc["kind"] = "replay";
    doc["completed"] = outcome.completed;
    if (outcome.metrics) {
        doc["clipping_ms"] = outcome.metrics->clipping_ms;
        doc["navigation_ms"] = outcome.metrics->navigation_ms;
        doc["total_ms"] = outcome.metrics->total_ms;
    } else {
        doc["clipping_ms"] = nullptr;
        doc["navigation_ms"] = nullptr;
        doc["total_ms"] = nullptr;
    }
    doc["gate_ms"] = outcome.gate_ms ? Json(*outcome.gate_ms) : Json(nullptr);
    doc["rejections"] = outcome.rejections;
    doc["aims"] = outcome.aims;
    doc["confirms"] = outcome.confirms;
    doc["participant"] = scene.trial.participant;
    doc["display"] = to_string(scene.nav.display);
    doc["style"] = to_string(scene.nav.style);
    doc["measure"] = to_string(scene.trial.measure);
    doc["phase"] = to_string(scene.trial.phase);
    doc["target"] = scene.trial.target_id();
    doc["final_state"] = nav_state_to_json(outcome.final_state);
    if (outcome.q1) doc["q1"] = question_to_json(*outcome.q1);
    Json answers = Json::array();
    for (const auto& a : outcome.answers) {
        answers.push_back(Json{{"question", a.question},
                               {"choice", a.choice},
                               {"correct", a.correct ? Json(*a.correct) : Json(nullptr)}});
    }
    doc["answers"] = std::move(answers);
    return doc;
}

//---------------------------------------------------------------------------//
// Oracle agent
//---------------------------------------------------------------------------//

AgentResult run_agent(const SceneDocument& scene, std::int64_t action_interval_ms) {
    TrialRunner runner(scene.trial_context(), scene.nav);
    AgentResult result;
    std::int64_t t = 0;
    auto act = [&](Event e, std::int64_t advance) {
        t += advance;
        LogEntry entry{t, std::move(e)};
        result.log.entries.push_back(entry);
        runner.apply(entry);
    };
    const auto settle = static_cast<std::int64_t>(std::ceil(scene.nav.animation_ms));

    const DefectRegion& target = scene.target();
    act(ClipEvent{runner.state().transform.apply(target.center).y}, action_interval_ms);

    const int depth = scene.nav.max_depth;
    if (scene.nav.style == NavStyle::Structured) {
        for (int level = 0; level < depth; ++level) {
            const NavState& state = runner.state();
            const Aabb focus = state.focus();
            const Aabb child = octant_aabb(focus, target.cell_path.at(static_cast<std::size_t>(level)));
            // Approach along the diagonal through the child's outer corner,
            // which belongs to no other child.
            const Vec3 outward = child.center() - focus.center();
            const Vec3 origin = child.center() + 4.0 * outward;
            const Ray world{state.transform.apply(origin), -1.0 * outward};
            act(AimEvent{Ray::make(world.origin, world.direction)}, action_interval_ms);
            act(ConfirmEvent{}, action_interval_ms);
            act(TickEvent{static_cast<double>(settle)}, settle);
        }
    } else {
        // Straight down onto the cut face of the target sphere.
        const NavState& state = runner.state();
        const Vec3 above = state.transform.apply(target.center);
        act(AimEvent{Ray::make({above.x, kStage.max.y + 1.0, above.z}, {0.0, -1.0, 0.0})}, action_interval_ms);
        for (int level = 0; level < depth; ++level) {
            act(ConfirmEvent{}, action_interval_ms);
            act(TickEvent{static_cast<double>(settle)}, settle);
        }
    }
    result.outcome = runner.finish();
    if (!result.outcome.completed) {
        throw InvariantError("agent could not reach defect " + std::to_string(target.id));
    }
    return result;
}

//---------------------------------------------------------------------------//
// Schedules
//---------------------------------------------------------------------------//

Json schedule_to_json(const std::vector<ParticipantSchedule>& schedules, std::uint64_t master_seed, bool with_trials) {
    Json participants = Json::array();
    for (const auto& s : schedules) {
        Json order = Json::array();
        for (const Condition& c : s.condition_order) {
            order.push_back(Json{{"display", to_string(c.display)}, {"style", to_string(c.style)}});
        }
        Json entry{{"participant", s.participant}, {"group", s.participant % 4}, {"order", std::move(order)}};
        if (with_trials) {
            Json trials = Json::array();
            for (const TrialSpec& t : build_trials(s, master_seed)) {
                Json tj = trial_json(t);
                tj["display"] = to_string(t.condition.display);
                tj["style"] = to_string(t.condition.style);
                trials.push_back(std::move(tj));
            }
            entry["trials"] = std::move(trials);
        }
        participants.push_back(std::move(entry));
    }
    return Json{{"primo_schema", kSchemaVersion},
                {"kind", "schedule"},
                {"n", schedules.size()},
                {"master_seed", master_seed},
                {"participants", std::move(participants)}};
}

//---------------------------------------------------------------------------//
// Analysis
//---------------------------------------------------------------------------//

AnalysisReport analyze_reports(const std::vector<Json>& reports) {
    std::map<std::string, stats::SampleTable> tables;
    static const std::array<std::string, 5> order{"clipping_ms", "navigation_ms", "total_ms", "q1_accuracy", "q2_accuracy"};

    for (const Json& r : reports) {
        require_schema(r, "analyze");
        if (string_at(r, "kind") != "replay") schema_fail("analyze expects replay reports");
        stats::SampleRow row;
        row.display = parse_display(string_at(r, "display"));
        row.style = parse_style(string_at(r, "style"));
        row.participant = static_cast<int>(int_at(r, "participant"));
        const std::string measure = string_at(r, "measure");
        if (measure == "time" && member(r, "completed").get<bool>()) {
            for (const char* name : {"clipping_ms", "navigation_ms", "total_ms"}) {
                row.value = real_at(r, name);
                tables[name].rows.push_back(row);
            }
        }
        if (const auto it = r.find("answers"); it != r.end() && it->is_array()) {
            for (const Json& a : *it) {
                const Json& correct = member(a, "correct");
                if (!correct.is_boolean()) continue;
                row.value = correct.get<bool>() ? 1.0 : 0.0;
                tables[string_at(a, "question") + "_accuracy"].rows.push_back(row);
            }
        }
    }

    AnalysisReport out;
    Json measures = Json::object();
    std::ostringstream text;
    for (const std::string& name : order) {
        const auto it = tables.find(name);
        if (it == tables.end()) continue;
        Json m;
        m["n"] = it->second.rows.size();
        text << name << " (n=" << it->second.rows.size() << ")\n";
        try {
            const stats::AnovaResult a = stats::anova_2x2(it->second);
            Json cells = Json::array();
            for (const auto& c : a.cells) {
                cells.push_back(Json{{"display", to_string(c.display)},
                                     {"style", to_string(c.style)},
                                     {"n", c.n},
                                     {"mean", c.mean},
                                     {"sd", c.sd}});
            }
            auto effect_json = [](const stats::EffectResult& e) {
                return Json{{"F", std::isinf(e.F) ? Json("inf") : Json(e.F)},
                            {"df", Json::array({e.df_num, e.df_den})},
                            {"p", e.p},
                            {"eta_p_sq", e.eta_p_sq},
                            {"ss", e.ss}};
            };
            m["cells"] = std::move(cells);
            m["effects"] = Json{{"display", effect_json(a.display)},
                                {"style", effect_json(a.style)},
                                {"interaction", effect_json(a.interaction)}};
            m["ss_error"] = a.ss_error;
            m["df_error"] = a.df_error;

            char line[160];
            std::snprintf(line, sizeof(line), "  %-18s %10s %9s %9s %9s\n", "effect", "F", "df", "p", "eta_p^2");
            text << line;
            const std::array<std::pair<const char*, const stats::EffectResult*>, 3> rows{
                {{"display", &a.display}, {"style", &a.style}, {"display x style", &a.interaction}}};
            for (const auto& [label, e] : rows) {
                const std::string df = std::to_string(e->df_num) + "," + std::to_string(e->df_den);
                std::snprintf(line, sizeof(line), "  %-18s %10s %9s %9s %9s\n", label, format_real(e->F).c_str(),
                              df.c_str(), format_real(e->p).c_str(), format_real(e->eta_p_sq).c_str());
                text << line;
            }
            for (const auto& c : a.cells) {
                const std::string cell = std::string(to_string(c.display)) + "/" + std::string(to_string(c.style));
                std::snprintf(line, sizeof(line), "  %-26s mu=%-12s sigma=%s\n", cell.c_str(),
                              format_real(c.mean).c_str(), format_real(c.sd).c_str());
                text << line;
            }
        } catch (const DomainError& e) {
            m["error"] = e.what();
            text << "  not analyzable: " << e.what() << "\n";
        }
        measures[name] = std::move(m);
    }
    out.report = Json{{"primo_schema", kSchemaVersion},
                      {"kind", "analysis"},
                      {"n_reports", reports.size()},
                      {"measures", std::move(measures)}};
    out.table = text.str();
    return out;
}

}  // namespace primo
