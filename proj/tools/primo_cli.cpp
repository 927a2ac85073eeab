// Operator entry point. Talks to the core only through primo.h.
//
// Exit codes: 0 ok, 1 domain error, 2 usage or schema, 3 incomplete trial,
// 4 internal invariant breach.

#include "primo/primo.h"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

// Owns a string allocated by the library.
struct LibString {
    char* ptr = nullptr;
    ~LibString() { primo_string_free(ptr); }
    std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

struct SceneDeleter {
    void operator()(primo_scene* s) const { primo_scene_free(s); }
};
using ScenePtr = std::unique_ptr<primo_scene, SceneDeleter>;

struct SessionDeleter {
    void operator()(primo_session* s) const { primo_session_free(s); }
};
using SessionPtr = std::unique_ptr<primo_session, SessionDeleter>;

int report_failure(primo_status status, const std::string& context) {
    std::cerr << "primo " << context << ": " << primo_last_error() << "\n";
    return static_cast<int>(status);
}

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    out.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return true;
}

// Writes to `path`, or stdout for an empty path.
int emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return std::cout ? 0 : 4;
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        std::cerr << "primo: cannot write '" << path << "'\n";
        return 2;
    }
    return 0;
}

int load_scene(const std::string& path, ScenePtr& scene) {
    primo_scene* raw = nullptr;
    const primo_status status = primo_scene_load_file(path.c_str(), &raw);
    scene.reset(raw);
    return status == PRIMO_OK ? 0 : report_failure(status, "scene");
}

struct GenerateArgs {
    primo_generate_options options = primo_generate_options_default();
    std::string style = "structured";
    std::string display = "selection";
    std::string pattern = "grid-struts";
    std::string measure = "time";
    std::string mesh;
    std::string out;
    bool pretty = false;
};

int run_generate(GenerateArgs& args) {
    primo_generate_options& o = args.options;
    o.style = args.style == "unstructured" ? PRIMO_UNSTRUCTURED : PRIMO_STRUCTURED;
    o.display = args.display == "everything" ? PRIMO_EVERYTHING : PRIMO_SELECTION;
    o.pattern = args.pattern == "gyroid-approx" ? PRIMO_GYROID_APPROX : PRIMO_GRID_STRUTS;
    o.measure = args.measure == "awareness" ? PRIMO_AWARENESS : PRIMO_TIME;
    o.mesh_path = args.mesh.empty() ? nullptr : args.mesh.c_str();

    primo_scene* raw = nullptr;
    primo_status status = primo_scene_generate(&o, &raw);
    ScenePtr scene(raw);
    if (status != PRIMO_OK) return report_failure(status, "generate");
    LibString json;
    status = primo_scene_to_json(scene.get(), args.pretty ? 2 : -1, &json.ptr);
    if (status != PRIMO_OK) return report_failure(status, "generate");
    return emit(args.out, json.str() + "\n");
}

int run_replay(const std::string& scene_path, const std::string& log_path) {
    ScenePtr scene;
    if (const int rc = load_scene(scene_path, scene)) return rc;
    std::string log;
    if (!read_file(log_path, log)) {
        std::cerr << "primo replay: cannot open '" << log_path << "'\n";
        return 2;
    }
    LibString report;
    const primo_status status = primo_replay(scene.get(), log.data(), log.size(), &report.ptr);
    if (report.ptr) std::cout << report.str() << "\n";
    if (status == PRIMO_INCOMPLETE) {
        std::cerr << "primo replay: trial incomplete (target never revealed)\n";
        return 3;
    }
    return status == PRIMO_OK ? 0 : report_failure(status, "replay");
}

int run_agent(const std::string& scene_path, const std::string& log_out) {
    ScenePtr scene;
    if (const int rc = load_scene(scene_path, scene)) return rc;
    LibString log;
    LibString report;
    const primo_status status = primo_agent(scene.get(), &log.ptr, &report.ptr);
    if (status != PRIMO_OK) return report_failure(status, "agent");
    if (!log_out.empty()) {
        if (const int rc = emit(log_out, log.str())) return rc;
    }
    std::cout << report.str() << "\n";
    return 0;
}

int run_schedule(int n, std::uint64_t seed, bool with_trials, const std::string& out) {
    LibString json;
    const primo_status status = primo_schedule_json(n, seed, with_trials ? 1 : 0, &json.ptr);
    if (status != PRIMO_OK) return report_failure(status, "schedule");
    return emit(out, json.str() + "\n");
}

int run_analyze(const std::string& dir, bool table) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
        std::cerr << "primo analyze: '" << dir << "' is not a directory\n";
        return 2;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<std::string> texts(files.size());
    std::vector<const char*> pointers;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (!read_file(files[i].string(), texts[i])) {
            std::cerr << "primo analyze: cannot open '" << files[i].string() << "'\n";
            return 2;
        }
        pointers.push_back(texts[i].c_str());
    }
    LibString report;
    LibString text;
    const primo_status status = primo_analyze_json(pointers.data(), pointers.size(), &report.ptr, &text.ptr);
    if (status != PRIMO_OK) return report_failure(status, "analyze");
    std::cout << (table ? text.str() : report.str() + "\n");
    return 0;
}

// One JSON request per input line, one response per output line. Request
// errors are answered in-band so the channel stays open.
int run_bridge(const std::string& scene_path) {
    ScenePtr scene;
    if (const int rc = load_scene(scene_path, scene)) return rc;
    primo_session* raw = nullptr;
    const primo_status created = primo_session_create(scene.get(), &raw);
    SessionPtr session(raw);
    if (created != PRIMO_OK) return report_failure(created, "bridge");

    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        LibString response;
        const primo_status status = primo_session_apply(session.get(), line.data(), line.size(), &response.ptr);
        if (status == PRIMO_OK) {
            std::cout << response.str() << "\n";
        } else {
            std::string message = primo_last_error();
            std::string escaped;
            for (char c : message) {
                if (c == '"' || c == '\\') escaped += '\\';
                if (static_cast<unsigned char>(c) < 0x20) continue;
                escaped += c;
            }
            std::cout << "{\"error\":\"" << escaped << "\",\"status\":" << static_cast<int>(status) << "}\n";
        }
        std::cout.flush();
    }
    return 0;
}

int run_export_obj(const std::string& scene_path, const std::string& out) {
    ScenePtr scene;
    if (const int rc = load_scene(scene_path, scene)) return rc;
    LibString obj;
    const primo_status status = primo_scene_export_obj(scene.get(), &obj.ptr);
    if (status != PRIMO_OK) return report_failure(status, "export-obj");
    return emit(out, obj.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PRIMO headless core: scenes, replay, oracle agent, schedules and analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(primo_version()));

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Write a deterministic scene document");
    generate->add_option("--seed", gen.options.seed, "Object seed")->capture_default_str();
    generate->add_option("--depth", gen.options.depth, "Scale levels to the defect cells")->check(CLI::Range(1, 20));
    generate->add_option("--defects", gen.options.defects, "Number of defect regions")->check(CLI::PositiveNumber);
    generate->add_option("--lattice-cells", gen.options.lattice_cells, "Lattice cells per axis")->check(CLI::Range(1, 256));
    generate->add_option("--thickness", gen.options.strut_thickness, "Strut thickness in object units");
    generate->add_option("--pattern", gen.pattern, "Lattice pattern")->check(CLI::IsMember({"grid-struts", "gyroid-approx"}));
    generate->add_option("--gyroid-resolution", gen.options.gyroid_resolution, "Samples per cell edge")->check(CLI::Range(2, 64));
    generate->add_option("--style", gen.style, "Navigation style")->check(CLI::IsMember({"structured", "unstructured"}));
    generate->add_option("--display", gen.display, "Display mode")->check(CLI::IsMember({"selection", "everything"}));
    generate->add_option("--target", gen.options.target, "Target defect id (1-based)");
    generate->add_option("--measure", gen.measure, "Trial measure")->check(CLI::IsMember({"time", "awareness"}));
    generate->add_option("--mesh", gen.mesh, "OBJ or STL mesh replacing the lattice")->check(CLI::ExistingFile);
    generate->add_option("--participant", gen.options.participant, "Take the scene from this participant's schedule");
    generate->add_option("--trial", gen.options.trial_index, "Trial index within the schedule (0..79)");
    generate->add_option("--master-seed", gen.options.master_seed, "Schedule master seed");
    generate->add_option("--out,-o", gen.out, "Output file (default stdout)");
    generate->add_flag("--pretty", gen.pretty, "Indent the JSON");

    std::string scene_path;
    std::string log_path;
    auto* replay = app.add_subcommand("replay", "Replay a session log against a scene and print metrics");
    replay->add_option("scene", scene_path, "Scene JSON")->required();
    replay->add_option("log", log_path, "Session log (JSONL)")->required();

    std::string log_out;
    auto* agent = app.add_subcommand("agent", "Run the ideal operator for the scene's navigation style");
    agent->add_option("scene", scene_path, "Scene JSON")->required();
    agent->add_option("--log-out", log_out, "Write the synthesized session log here");

    int n = 0;
    std::uint64_t schedule_seed = 1;
    bool with_trials = false;
    std::string schedule_out;
    auto* schedule = app.add_subcommand("schedule", "Counterbalanced condition orders and trial lists");
    const CLI::Validator multiple_of_four(
        [](std::string& value) -> std::string {
            try {
                const long count = std::stol(value);
                if (count > 0 && count % 4 == 0) return {};
            } catch (const std::exception&) {
            }
            return "must be a positive multiple of 4";
        },
        "MULTIPLE_OF_4");
    schedule->add_option("--n", n, "Participants (multiple of 4)")->required()->check(multiple_of_four);
    schedule->add_option("--seed", schedule_seed, "Master seed")->capture_default_str();
    schedule->add_flag("--with-trials", with_trials, "Include the 80 trials of every participant");
    schedule->add_option("--out,-o", schedule_out, "Output file (default stdout)");

    std::string metrics_dir;
    bool table = false;
    auto* analyze = app.add_subcommand("analyze", "Two-way analysis over a directory of replay reports");
    analyze->add_option("dir", metrics_dir, "Directory of *.json replay reports")->required();
    analyze->add_flag("--table", table, "Print the plain-text table instead of JSON");

    auto* bridge = app.add_subcommand("bridge", "Drive a live session with JSON requests on stdin");
    bridge->add_option("scene", scene_path, "Scene JSON")->required();

    std::string obj_out;
    auto* export_obj = app.add_subcommand("export-obj", "Write the scene's object mesh as OBJ");
    export_obj->add_option("scene", scene_path, "Scene JSON")->required();
    export_obj->add_option("--out,-o", obj_out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (*generate) return run_generate(gen);
    if (*replay) return run_replay(scene_path, log_path);
    if (*agent) return run_agent(scene_path, log_out);
    if (*schedule) return run_schedule(n, schedule_seed, with_trials, schedule_out);
    if (*analyze) return run_analyze(metrics_dir, table);
    if (*bridge) return run_bridge(scene_path);
    if (*export_obj) return run_export_obj(scene_path, obj_out);
    return 2;
}
