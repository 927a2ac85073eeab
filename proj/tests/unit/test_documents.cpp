#include "primo/documents.hpp"
#include "primo/errors.hpp"

#include <gtest/gtest.h>

namespace primo {
namespace {

GenerateOptions small_options(NavStyle style = NavStyle::Structured, int depth = 3) {
    GenerateOptions o;
    o.seed = 2024;
    o.depth = depth;
    o.lattice = {4, 0.03, LatticePattern::GridStruts, 8};
    o.style = style;
    return o;
}

TEST(Scene, GenerationIsDeterministic) {
    const Json a = scene_to_json(generate_scene(small_options()));
    const Json b = scene_to_json(generate_scene(small_options()));
    EXPECT_EQ(a.dump(), b.dump());
    GenerateOptions other = small_options();
    other.seed = 2025;
    EXPECT_NE(a.dump(), scene_to_json(generate_scene(other)).dump());
}

TEST(Scene, JsonRoundTripIsStable) {
    const SceneDocument scene = generate_scene(small_options(NavStyle::Unstructured));
    const Json doc = scene_to_json(scene);
    EXPECT_EQ(doc.at("primo_schema"), kSchemaVersion);
    EXPECT_EQ(doc.at("kind"), "scene");
    const SceneDocument back = scene_from_json(Json::parse(doc.dump()));
    EXPECT_EQ(scene_to_json(back).dump(), doc.dump());
    EXPECT_EQ(back.nav.style, NavStyle::Unstructured);
    EXPECT_EQ(back.object->mesh.triangle_count(), scene.object->mesh.triangle_count());
    ASSERT_TRUE(back.q2);
}

TEST(Scene, InvalidOptionsAndTargets) {
    GenerateOptions o = small_options();
    o.target = 5;
    EXPECT_THROW(generate_scene(o), DomainError);
    o = small_options();
    o.depth = 1;
    o.defects = 9;
    EXPECT_THROW(generate_scene(o), DomainError);
    o = small_options();
    o.depth = 0;
    EXPECT_THROW(generate_scene(o), ContractError);
}

TEST(Scene, SchemaErrors) {
    Json doc = scene_to_json(generate_scene(small_options()));
    Json wrong_version = doc;
    wrong_version["primo_schema"] = 99;
    EXPECT_THROW(scene_from_json(wrong_version), SchemaError);
    Json missing = doc;
    missing.erase("defects");
    EXPECT_THROW(scene_from_json(missing), SchemaError);
    Json bad_type = doc;
    bad_type["nav"]["max_depth"] = "three";
    EXPECT_THROW(scene_from_json(bad_type), SchemaError);
    EXPECT_THROW(scene_from_json(Json::array()), SchemaError);
}

TEST(Agent, StructuredAimsEveryLevel) {
    for (int depth = 1; depth <= 5; ++depth) {
        const SceneDocument scene = generate_scene(small_options(NavStyle::Structured, depth));
        const AgentResult r = run_agent(scene);
        ASSERT_TRUE(r.outcome.completed);
        EXPECT_EQ(r.outcome.aims, depth);
        EXPECT_EQ(r.outcome.confirms, depth);
        EXPECT_EQ(r.outcome.rejections, 0);
        const TrialOutcome again = run_trial(scene.trial_context(), r.log, scene.nav);
        EXPECT_EQ(again.metrics, r.outcome.metrics);
    }
}

TEST(Agent, UnstructuredAimsOnce) {
    for (int depth = 1; depth <= 5; ++depth) {
        const SceneDocument scene = generate_scene(small_options(NavStyle::Unstructured, depth));
        const AgentResult r = run_agent(scene);
        ASSERT_TRUE(r.outcome.completed);
        EXPECT_EQ(r.outcome.aims, 1);
        EXPECT_EQ(r.outcome.confirms, depth);
    }
}

TEST(ReplayReport, CarriesMetricsAndCondition) {
    const SceneDocument scene = generate_scene(small_options());
    const AgentResult r = run_agent(scene);
    const Json report = replay_report(scene, r.outcome);
    EXPECT_EQ(report.at("kind"), "replay");
    EXPECT_EQ(report.at("completed"), true);
    EXPECT_EQ(report.at("total_ms").get<std::int64_t>(), r.outcome.metrics->total_ms);
    EXPECT_EQ(report.at("style"), "structured");
    EXPECT_EQ(report.at("final_state").at("depth"), 3);
}

Json fake_report(const char* display, const char* style, double total, int participant) {
    return Json{{"primo_schema", kSchemaVersion},
                {"kind", "replay"},
                {"completed", true},
                {"clipping_ms", total / 4},
                {"navigation_ms", total * 3 / 4},
                {"total_ms", total},
                {"participant", participant},
                {"display", display},
                {"style", style},
                {"measure", "time"},
                {"answers", Json::array({Json{{"question", "q1"}, {"choice", 0}, {"correct", participant % 2 == 0}}})}};
}

TEST(Analyze, BuildsTablesPerMeasure) {
    std::vector<Json> reports;
    const double v[4][2] = {{1, 2}, {3, 4}, {5, 6}, {7, 8}};
    const char* displays[2] = {"selection", "everything"};
    const char* styles[2] = {"structured", "unstructured"};
    int p = 0;
    for (int c = 0; c < 4; ++c) {
        for (double x : v[c]) reports.push_back(fake_report(displays[c / 2], styles[c % 2], x, p++));
    }
    const AnalysisReport a = analyze_reports(reports);
    const Json& total = a.report.at("measures").at("total_ms");
    EXPECT_EQ(total.at("n"), 8);
    EXPECT_NEAR(total.at("effects").at("display").at("F").get<double>(), 64.0, 1e-9);
    EXPECT_NEAR(total.at("effects").at("style").at("F").get<double>(), 16.0, 1e-9);
    EXPECT_NE(a.table.find("display x style"), std::string::npos);
    EXPECT_TRUE(a.report.at("measures").contains("q1_accuracy"));
}

TEST(Analyze, UnanalyzableMeasureReportsError) {
    std::vector<Json> reports{fake_report("selection", "structured", 1, 0)};
    const AnalysisReport a = analyze_reports(reports);
    EXPECT_TRUE(a.report.at("measures").at("total_ms").contains("error"));
    reports[0]["kind"] = "scene";
    EXPECT_THROW(analyze_reports(reports), SchemaError);
}

TEST(Schedule, JsonListsGroups) {
    const Json doc = schedule_to_json(build_schedule(8), 5, true);
    EXPECT_EQ(doc.at("kind"), "schedule");
    ASSERT_EQ(doc.at("participants").size(), 8u);
    EXPECT_EQ(doc.at("participants")[0].at("trials").size(), 80u);
}

}  // namespace
}  // namespace primo
