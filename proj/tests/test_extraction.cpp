#include "isa/extraction.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace isa;
using namespace isa::extraction;

namespace {

std::string fixture(const std::string& name) { return read_file(std::string(ISA_TEST_DATA) + "/" + name); }

FeatureVector timeseries_fixture() {
    const auto t = parse_scenario_ts(fixture("scenario_timeseries.json"), "scenario_timeseries.json");
    const std::vector<ScenarioTimeline> suite{t};
    return extract_dynamic_features(t, build_encodings(suite), "a");
}

RoadTest road_of(const std::vector<Point2>& pts) {
    RoadTest r;
    r.test_id = "r";
    r.road_points = pts;
    return r;
}

std::vector<Point2> arc(double radius, double step_deg, double sweep_deg) {
    std::vector<Point2> p;
    for (double a = 0.0; a <= sweep_deg + 1e-9; a += step_deg) {
        const double t = a * std::numbers::pi / 180.0;
        p.push_back({radius * std::cos(t), radius * std::sin(t)});
    }
    return p;
}

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an error";
    return ErrorCode::Io;
}

} // namespace

TEST(Extraction, FeatureNameTablesHaveExpectedSizes) {
    EXPECT_EQ(dynamic_feature_names().size(), 61u);
    EXPECT_EQ(road_feature_names().size(), 15u);
}

TEST(Extraction, TimeSeriesScenarioHandValues) {
    const auto fv = timeseries_fixture();
    ASSERT_EQ(fv.names.size(), 61u);
    EXPECT_EQ(fv.outcome, Outcome::Safe);
    EXPECT_NEAR(fv.at("AV_acceleration"), std::sqrt(0.37 * 0.37 + 0.48 * 0.48 + 9.81 * 9.81), 1e-12);
    EXPECT_NEAR(fv.at("AV_velocity"), std::sqrt(2.0) * 1.28, 1e-12);
    EXPECT_NEAR(fv.at("AV_position"), std::sqrt(552874.26 * 552874.26 + 4182784.82 * 4182784.82 + 10.13 * 10.13), 1e-6);
    EXPECT_EQ(fv.at("AV_speed"), 1);
    EXPECT_TRUE(fv.is_missing("AV_throttle"));
    EXPECT_EQ(fv.at("num_NPCs"), 1);
    EXPECT_EQ(fv.at("num_peds"), 0);
    EXPECT_EQ(fv.at("num_statObs"), 0);
    EXPECT_EQ(fv.at("tot_obs"), 1);
    EXPECT_EQ(fv.at("is_ped"), 0);
    EXPECT_EQ(fv.at("traffic_light"), 1);
    EXPECT_EQ(fv.at("rain"), 1);
    EXPECT_EQ(fv.at("fog"), 0);
    EXPECT_EQ(fv.at("wetness"), 1);
    EXPECT_EQ(fv.at("time_of_day"), 1);
    EXPECT_EQ(fv.at("Sidewalk"), 0);
    EXPECT_NEAR(fv.at("min_obsDist"), 17.88, 1e-12);
    EXPECT_NEAR(fv.at("max_obsDist"), 18.17, 1e-12);
    EXPECT_NEAR(fv.at("avg_obsDist"), 18.025, 1e-12);
    EXPECT_NEAR(fv.at("dist_minDistObs"), 17.88, 1e-12);
    EXPECT_EQ(fv.at("type_minDistObs"), 1);
    EXPECT_EQ(fv.at("vol_minDistObs"), 2);
    EXPECT_EQ(fv.at("speed_minDistObs"), 0);
    // EmergencyBrake, SpeedCut, SwitchLane (RightToLeft)
    EXPECT_EQ(fv.at("op_minDistObs"), 2);
    EXPECT_TRUE(fv.is_missing("avg_obsVel"));
    EXPECT_TRUE(fv.is_missing("max_obsAcc"));
}

TEST(Extraction, CollisionMarksScenarioUnsafe) {
    auto doc = nlohmann::json::parse(fixture("scenario_timeseries.json"));
    doc["TimeStep3"]["CollisionInfoAtTimeStep"] = "Occurred";
    const auto t = parse_scenario_ts(doc.dump());
    const std::vector<ScenarioTimeline> suite{t};
    EXPECT_EQ(extract_dynamic_features(t, build_encodings(suite)).outcome, Outcome::Unsafe);
}

TEST(Extraction, TimestepsAreOrderedNumerically) {
    const auto t = parse_scenario_ts(R"({"TimeStep10": {"Ego_Position": {"px":0,"py":0,"pz":0,"vx":0,"vy":0,"ax":0,"ay":0,"az":1}},
                                         "TimeStep2": {"Ego_Position": {"px":0,"py":0,"pz":0,"vx":3,"vy":4,"ax":0,"ay":0,"az":2}}})");
    ASSERT_EQ(t.steps.size(), 2u);
    EXPECT_EQ(t.steps[0].index, 2);
    const std::vector<ScenarioTimeline> suite{t};
    EXPECT_DOUBLE_EQ(extract_dynamic_features(t, build_encodings(suite)).at("AV_velocity"), 5.0);
}

TEST(Extraction, TimeSeriesErrors) {
    EXPECT_EQ(code_of([] { parse_scenario_ts("{not json"); }), ErrorCode::MalformedJson);
    EXPECT_EQ(code_of([] { parse_scenario_ts(R"({"foo": 1})"); }), ErrorCode::EmptyTimeline);
    EXPECT_EQ(code_of([] { parse_scenario_ts(R"({"TimeStep1": {"Ego_Operation": "x"}})"); }), ErrorCode::MissingField);
    EXPECT_EQ(code_of([] { EncodingTables::speed("warp"); }), ErrorCode::UnknownCategory);
}

TEST(Extraction, RoadDocumentParses) {
    const auto r = parse_road(fixture("road_test.json"), "road_test.json");
    ASSERT_EQ(r.road_points.size(), 5u);
    EXPECT_EQ(r.road_points.front(), (Point2{100.0, 100.0}));
    EXPECT_EQ(r.outcome, Outcome::Unsafe);
    EXPECT_TRUE(r.valid);
    const auto fv = extract_road_features(r);
    ASSERT_EQ(fv.names.size(), 15u);
    double len = 0.0;
    for (std::size_t i = 1; i < r.road_points.size(); ++i)
        len += std::hypot(r.road_points[i].x - r.road_points[i - 1].x, r.road_points[i].y - r.road_points[i - 1].y);
    EXPECT_NEAR(fv.at("road_distance"), len, 1e-12);
    EXPECT_EQ(fv.outcome, Outcome::Unsafe);
}

TEST(Extraction, StraightRoadHasNoTurns) {
    const auto fv = extract_road_features(road_of({{0, 0}, {10, 0}, {20, 0}, {35, 0}}));
    EXPECT_EQ(fv.at("num_straights"), 1);
    EXPECT_EQ(fv.at("num_l_turns"), 0);
    EXPECT_EQ(fv.at("num_r_turns"), 0);
    EXPECT_TRUE(fv.is_missing("total_angle"));
    EXPECT_TRUE(fv.is_missing("mean_pivot_off"));
    EXPECT_DOUBLE_EQ(fv.at("road_distance"), 35.0);
}

TEST(Extraction, QuarterCircleIsOneLeftTurn) {
    const auto fv = extract_road_features(road_of(arc(50.0, 3.0, 90.0)));
    EXPECT_EQ(fv.at("num_l_turns"), 1);
    EXPECT_EQ(fv.at("num_r_turns"), 0);
    EXPECT_EQ(fv.at("num_straights"), 0);
    EXPECT_NEAR(fv.at("total_angle"), 90.0, 3.0);
    EXPECT_NEAR(fv.at("mean_pivot_off"), 50.0, 0.5);
}

TEST(Extraction, MirroredCircleTurnsRight) {
    auto p = arc(50.0, 3.0, 90.0);
    for (auto& q : p) q.y = -q.y;
    const auto fv = extract_road_features(road_of(p));
    EXPECT_EQ(fv.at("num_r_turns"), 1);
    EXPECT_EQ(fv.at("num_l_turns"), 0);
}

TEST(Extraction, RoadFeaturesInvariantToRigidMotion) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 0.4);
    std::vector<Point2> p{{0, 0}};
    double heading = 0.0;
    for (int i = 0; i < 40; ++i) {
        heading += g(rng);
        p.push_back({p.back().x + 4.0 * std::cos(heading), p.back().y + 4.0 * std::sin(heading)});
    }
    const double th = 0.73, c = std::cos(th), s = std::sin(th);
    std::vector<Point2> q;
    for (const auto& v : p) q.push_back({c * v.x - s * v.y + 317.0, s * v.x + c * v.y - 42.5});
    const auto a = extract_road_features(road_of(p));
    const auto b = extract_road_features(road_of(q));
    for (const auto& name : road_feature_names()) {
        ASSERT_EQ(a.is_missing(name), b.is_missing(name)) << name;
        if (!a.is_missing(name)) {
            EXPECT_NEAR(a.at(name), b.at(name), 1e-6) << name;
        }
    }
}

TEST(Extraction, RoadErrors) {
    EXPECT_EQ(code_of([] { parse_road(R"({"test_outcome": "PASS"})"); }), ErrorCode::MissingField);
    EXPECT_EQ(code_of([] { parse_road(R"({"road_points": [[0,0],[1]], "test_outcome": "PASS"})"); }),
              ErrorCode::MalformedPoint);
    EXPECT_EQ(code_of([] { parse_road(R"({"road_points": [[0,0],[0,0]], "test_outcome": "PASS"})"); }),
              ErrorCode::TooFewPoints);
    EXPECT_EQ(code_of([] { parse_road(R"({"road_points": [[0,0],[1,0]], "test_outcome": "ERROR"})"); }),
              ErrorCode::UnknownCategory);
}

TEST(Extraction, InvalidRoadsAreSkippedFromDirectories) {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "isa_extract_skip";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "a.json") << R"({"road_points": [[0,0],[10,0],[20,5]], "test_outcome": "PASS"})";
    std::ofstream(dir / "b.json") << R"({"road_points": [[0,0],[10,0]], "test_outcome": "FAIL", "is_valid": false})";
    const auto res = extract_directory(dir, ScenarioFormat::Road);
    EXPECT_EQ(res.table.rows(), 1u);
    EXPECT_EQ(res.skipped, (std::vector<std::string>{"b"}));
    fs::remove_all(dir);
}
