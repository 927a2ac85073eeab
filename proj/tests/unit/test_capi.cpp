#include "primo/primo.h"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <memory>
#include <string>

namespace {

using Json = nlohmann::json;

struct SceneDeleter {
    void operator()(primo_scene* s) const { primo_scene_free(s); }
};
struct SessionDeleter {
    void operator()(primo_session* s) const { primo_session_free(s); }
};
using ScenePtr = std::unique_ptr<primo_scene, SceneDeleter>;
using SessionPtr = std::unique_ptr<primo_session, SessionDeleter>;

std::string take(char* text) {
    std::string out = text ? text : "";
    primo_string_free(text);
    return out;
}

primo_generate_options small_options() {
    primo_generate_options o = primo_generate_options_default();
    o.seed = 77;
    o.lattice_cells = 4;
    o.strut_thickness = 0.03;
    return o;
}

ScenePtr generate(const primo_generate_options& o) {
    primo_scene* raw = nullptr;
    EXPECT_EQ(primo_scene_generate(&o, &raw), PRIMO_OK) << primo_last_error();
    return ScenePtr(raw);
}

std::string scene_json(const primo_scene* scene) {
    char* text = nullptr;
    EXPECT_EQ(primo_scene_to_json(scene, -1, &text), PRIMO_OK);
    return take(text);
}

TEST(CApi, VersionAndDefaults) {
    EXPECT_STREQ(primo_version(), "1.0.0");
    const primo_generate_options o = primo_generate_options_default();
    EXPECT_EQ(o.participant, -1);
    EXPECT_GE(o.depth, 1);
}

TEST(CApi, GenerateIsDeterministicAndRoundTrips) {
    const ScenePtr a = generate(small_options());
    const ScenePtr b = generate(small_options());
    const std::string text = scene_json(a.get());
    EXPECT_EQ(text, scene_json(b.get()));
    primo_scene* raw = nullptr;
    ASSERT_EQ(primo_scene_from_json(text.data(), text.size(), nullptr, &raw), PRIMO_OK);
    const ScenePtr c(raw);
    EXPECT_EQ(scene_json(c.get()), text);
    int depth = 0;
    EXPECT_EQ(primo_scene_max_depth(c.get(), &depth), PRIMO_OK);
    EXPECT_EQ(depth, small_options().depth);
}

TEST(CApi, ErrorsMapToStatusCodes) {
    primo_generate_options o = small_options();
    o.depth = 1;
    o.defects = 9;
    primo_scene* raw = nullptr;
    EXPECT_EQ(primo_scene_generate(&o, &raw), PRIMO_ERROR_DOMAIN);
    EXPECT_EQ(raw, nullptr);
    EXPECT_NE(std::string(primo_last_error()), "");
    const std::string bad = "{\"primo_schema\":1";
    EXPECT_EQ(primo_scene_from_json(bad.data(), bad.size(), nullptr, &raw), PRIMO_ERROR_USAGE);
    EXPECT_EQ(primo_scene_generate(nullptr, &raw), PRIMO_ERROR_USAGE);
    char* out = nullptr;
    EXPECT_EQ(primo_schedule_json(10, 1, 0, &out), PRIMO_ERROR_DOMAIN);
    EXPECT_EQ(primo_scene_load_file("/nonexistent/scene.json", &raw), PRIMO_ERROR_USAGE);
}

TEST(CApi, AgentLogReplaysToSameReport) {
    const ScenePtr scene = generate(small_options());
    char* log = nullptr;
    char* report = nullptr;
    ASSERT_EQ(primo_agent(scene.get(), &log, &report), PRIMO_OK) << primo_last_error();
    const std::string log_text = take(log);
    const std::string agent_report = take(report);
    ASSERT_EQ(primo_replay(scene.get(), log_text.data(), log_text.size(), &report), PRIMO_OK);
    const Json replayed = Json::parse(take(report));
    EXPECT_EQ(replayed.at("completed"), true);
    EXPECT_EQ(replayed.at("total_ms"), Json::parse(agent_report).at("total_ms"));
}

TEST(CApi, TruncatedLogIsIncompleteWithReport) {
    const ScenePtr scene = generate(small_options());
    char* log = nullptr;
    char* report = nullptr;
    ASSERT_EQ(primo_agent(scene.get(), &log, &report), PRIMO_OK);
    primo_string_free(report);
    std::string text = take(log);
    text = text.substr(0, text.size() / 2);
    EXPECT_EQ(primo_replay(scene.get(), text.data(), text.size(), &report), PRIMO_INCOMPLETE);
    ASSERT_NE(report, nullptr);
    EXPECT_EQ(Json::parse(take(report)).at("completed"), false);
}

TEST(CApi, SessionBridge) {
    const ScenePtr scene = generate(small_options());
    primo_session* raw = nullptr;
    ASSERT_EQ(primo_session_create(scene.get(), &raw), PRIMO_OK);
    const SessionPtr session(raw);
    auto apply = [&](const std::string& request) {
        char* out = nullptr;
        const primo_status status = primo_session_apply(session.get(), request.data(), request.size(), &out);
        EXPECT_EQ(status, PRIMO_OK) << primo_last_error();
        return Json::parse(take(out));
    };
    Json r = apply(R"({"op":"confirm"})");
    EXPECT_EQ(r.at("rejection"), "gate_closed");
    EXPECT_EQ(r.at("state").at("depth"), 0);
    r = apply(R"({"op":"clip","data":{"h":0.5},"t":100})");
    EXPECT_TRUE(r.at("rejection").is_null());
    EXPECT_EQ(r.at("state").at("t"), 100);
    r = apply(R"({"op":"tick","data":{"dt_ms":50}})");
    EXPECT_EQ(r.at("state").at("t"), 150);
    r = apply(R"({"op":"state"})");
    EXPECT_TRUE(r.contains("state"));
    r = apply(R"({"op":"log"})");
    EXPECT_NE(r.at("log").get<std::string>().find("\"e\":\"clip\""), std::string::npos);

    char* out = nullptr;
    const std::string unknown = R"({"op":"teleport"})";
    EXPECT_EQ(primo_session_apply(session.get(), unknown.data(), unknown.size(), &out), PRIMO_ERROR_USAGE);
    const std::string backwards = R"({"op":"clip","data":{"h":0.2},"t":10})";
    EXPECT_EQ(primo_session_apply(session.get(), backwards.data(), backwards.size(), &out), PRIMO_ERROR_USAGE);
}

TEST(CApi, ScheduleAndAnalyze) {
    char* out = nullptr;
    ASSERT_EQ(primo_schedule_json(24, 3, 0, &out), PRIMO_OK);
    const Json schedule = Json::parse(take(out));
    EXPECT_EQ(schedule.at("participants").size(), 24u);
    const char* none[1] = {nullptr};
    char* table = nullptr;
    EXPECT_EQ(primo_analyze_json(none, 1, &out, &table), PRIMO_ERROR_USAGE);
}

TEST(CApi, ParticipantModeUsesSchedule) {
    primo_generate_options o = small_options();
    o.participant = 5;
    o.trial_index = 17;
    o.master_seed = 9;
    const ScenePtr a = generate(o);
    const Json doc = Json::parse(scene_json(a.get()));
    EXPECT_EQ(doc.at("trial").at("participant"), 5);
    o.trial_index = 80;
    primo_scene* raw = nullptr;
    EXPECT_NE(primo_scene_generate(&o, &raw), PRIMO_OK);
}

}  // namespace
