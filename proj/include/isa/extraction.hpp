#ifndef ISA_EXTRACTION_HPP
#define ISA_EXTRACTION_HPP

#include "isa/common.hpp"
#include "isa/metadata.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace isa::extraction {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

enum class ObstacleKind : int { Pedestrian = 0, NpcVehicle = 1, Static = 2 };

struct Obstacle {
    ObstacleKind kind = ObstacleKind::NpcVehicle;
    std::string key;
    Vec3 position;
    std::optional<std::string> volume;
    std::optional<std::string> operation;
    std::optional<nlohmann::json> speed; // category text or number
    std::optional<double> distance_temp;
    std::optional<double> velocity;
    std::optional<double> acceleration;
};

struct EgoState {
    Vec3 position;
    double vx = 0.0, vy = 0.0;
    Vec3 acceleration;
    std::optional<std::string> operation;
    std::optional<std::string> speed;
    std::optional<double> throttle;
    std::optional<double> brake;
    std::optional<double> steering_rate;
};

struct Timestep {
    long index = 0;
    EgoState ego;
    std::optional<std::string> rain, fog, wetness, time_of_day, traffic_light, sidewalk;
    std::vector<Obstacle> obstacles;
    std::string collision;
};

struct ScenarioTimeline {
    std::vector<Timestep> steps;
};

struct Point2 {
    double x = 0.0, y = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

struct RoadTest {
    std::string test_id;
    std::vector<Point2> road_points;
    Outcome outcome = Outcome::Safe;
    bool valid = true; // false => skipped during ingestion
};

/// One scenario's feature encoding. Missing entries carry NaN in `values`.
struct FeatureVector {
    std::string id;
    std::vector<std::string> names;
    std::vector<double> values;
    std::vector<bool> missing;
    Outcome outcome = Outcome::Safe;

    double at(std::string_view name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return values[i];
        throw Error(ErrorCode::UnknownFeature, std::string(name));
    }
    bool is_missing(std::string_view name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return missing[i];
        throw Error(ErrorCode::UnknownFeature, std::string(name));
    }
};

// clang-format off
inline const std::array<std::string, 61>& dynamic_feature_names() {
    static const std::array<std::string, 61> names{
        "AV_acceleration", "AV_throttle", "AV_brake", "AV_steeringRate", "AV_speed", "AV_velocity", "AV_position",
        "num_peds", "num_NPCs", "num_statObs", "tot_obs", "is_ped", "traffic_light", "Sidewalk",
        "rain", "fog", "wetness", "time_of_day",
        "avg_obsDist", "max_obsDist", "min_obsDist", "type_maxDistObs", "type_minDistObs", "op_maxDistObs",
        "op_minDistObs", "vol_minDistObs", "speed_minDistObs", "dist_minDistObs",
        "avg_obsSpeed", "max_obsSpeed", "min_obsSpeed", "type_maxSpeedObs", "type_minSpeedObs", "op_maxSpeedObs",
        "op_minSpeedObs", "vol_minSpeedObs", "speed_minSpeedObs", "dist_maxSpeedObs",
        "avg_obsVel", "max_obsVel", "min_obsVel", "type_maxVelObs", "type_minVelObs", "op_maxVelObs",
        "op_minVelObs", "vol_minVelObs",
        "avg_obsAcc", "min_obsAcc", "max_obsAcc", "type_maxAccObs", "type_minAccObs", "op_maxAccObs",
        "op_minAccObs", "vol_maxAccObs",
        "avg_obsVol", "max_obsVol", "min_obsVol", "type_maxVolObs", "type_minVolObs", "op_maxVolObs",
        "op_minVolObs"};
    return names;
}

inline const std::array<std::string, 15>& road_feature_names() {
    static const std::array<std::string, 15> names{
        "min_angle", "max_angle", "mean_angle", "median_angle", "std_angle", "total_angle",
        "min_pivot_off", "max_pivot_off", "mean_pivot_off", "median_pivot_off", "std_pivot_off",
        "num_l_turns", "num_r_turns", "num_straights", "road_distance"};
    return names;
}
// clang-format on

namespace detail {

inline std::string first_word_lower(std::string_view text) {
    auto s = csv::trim(text);
    std::string w;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c))) break;
        w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return w;
}

inline double lookup(std::string_view table, std::string_view text,
                     std::initializer_list<std::pair<std::initializer_list<const char*>, int>> entries) {
    const auto w = first_word_lower(text);
    for (const auto& [words, code] : entries)
        for (const char* candidate : words)
            if (w == candidate) return code;
    throw Error(ErrorCode::UnknownCategory, std::string(table) + " category '" + std::string(text) + "'");
}

} // namespace detail

/// Ordinal encodings for the categorical fields of time-series scenarios.
/// Category strings are matched on their leading word, case-insensitively
/// ("Light rain (0<rain_level<=0.2)" -> light). Operations are enumerated in
/// alphabetical order of the full strings observed in the suite.
struct EncodingTables {
    std::vector<std::string> operations;

    static double traffic_light(std::string_view s) {
        return detail::lookup("traffic_light", s,
                              {{{"none", "no"}, 0}, {{"green"}, 1}, {{"yellow", "orange", "amber"}, 2}, {{"red"}, 3}});
    }
    static double volume(std::string_view s) {
        return detail::lookup("volume", s, {{{"small"}, 0}, {{"medium"}, 1}, {{"large"}, 2}});
    }
    static double time_of_day(std::string_view s) {
        return detail::lookup("time_of_day", s, {{{"morning"}, 0}, {{"noon"}, 1}, {{"night"}, 2}});
    }
    static double weather(std::string_view s) {
        return detail::lookup("weather", s,
                              {{{"none", "no"}, 0}, {{"light"}, 1}, {{"moderate", "medium"}, 2}, {{"heavy"}, 3}});
    }
    static double speed(std::string_view s) {
        return detail::lookup("speed", s, {{{"stop"}, 0}, {{"slow"}, 1}, {{"moderate"}, 2}, {{"fast"}, 3}});
    }
    static double sidewalk(std::string_view s) {
        return detail::lookup("sidewalk", s,
                              {{{"none", "no", "false", "absent", "0"}, 0},
                               {{"yes", "true", "present", "exist", "exists", "1"}, 1}});
    }
    static double obstacle_kind(ObstacleKind k) { return static_cast<int>(k); }

    double operation(std::string_view s) const {
        auto it = std::lower_bound(operations.begin(), operations.end(), s);
        if (it == operations.end() || *it != s)
            throw Error(ErrorCode::UnknownCategory, "operation '" + std::string(s) + "'");
        return static_cast<double>(it - operations.begin());
    }
};

/// Collects every operation string (ego and obstacles) seen in the suite.
template <class Range>
EncodingTables build_encodings(const Range& timelines) {
    std::set<std::string> ops;
    for (const ScenarioTimeline& t : timelines)
        for (const auto& step : t.steps) {
            if (step.ego.operation) ops.insert(*step.ego.operation);
            for (const auto& o : step.obstacles)
                if (o.operation) ops.insert(*o.operation);
        }
    return EncodingTables{{ops.begin(), ops.end()}};
}

namespace detail {

using nlohmann::json;

inline double number_field(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number())
        throw Error(ErrorCode::MissingField, where + ": numeric field '" + key + "' required");
    return it->get<double>();
}

inline std::optional<std::string> text_field(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (it->is_string()) return it->get<std::string>();
    return it->dump();
}

inline std::optional<double> magnitude_field(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (it->is_number()) return std::abs(it->get<double>());
    if (it->is_object()) {
        double s = 0.0;
        for (const auto& [k, v] : it->items())
            if (v.is_number()) s += v.get<double>() * v.get<double>();
        return std::sqrt(s);
    }
    return std::nullopt;
}

inline std::optional<double> optional_number(const json& obj, std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
        auto it = obj.find(k);
        if (it != obj.end() && it->is_number()) return it->get<double>();
    }
    return std::nullopt;
}

inline void parse_participants(const json& step, const char* field, ObstacleKind kind, Timestep& out,
                               const std::string& where) {
    auto it = step.find(field);
    if (it == step.end() || it->is_null() || it->is_string()) return; // absent or literal "None"
    if (!it->is_object()) throw Error(ErrorCode::MalformedJson, where + ": '" + field + "' must be an object or \"None\"");
    for (const auto& [key, body] : it->items()) {
        const std::string here = where + "." + field + "." + key;
        if (!body.is_object()) throw Error(ErrorCode::MalformedJson, here + ": obstacle must be an object");
        auto pos = body.find("position");
        if (pos == body.end() || !pos->is_object())
            throw Error(ErrorCode::MissingField, here + ": obstacle position required");
        Obstacle o;
        o.kind = kind;
        o.key = key;
        o.position = {number_field(*pos, "x", here), number_field(*pos, "y", here),
                      pos->contains("z") ? number_field(*pos, "z", here) : 0.0};
        o.volume = text_field(body, "volume");
        o.operation = text_field(body, "operation");
        if (auto sp = body.find("speed"); sp != body.end() && !sp->is_null()) o.speed = *sp;
        if (auto d = body.find("distance_temp"); d != body.end() && d->is_number()) o.distance_temp = d->get<double>();
        o.velocity = magnitude_field(body, "velocity");
        o.acceleration = magnitude_field(body, "acceleration");
        out.obstacles.push_back(std::move(o));
    }
}

inline std::optional<long> timestep_number(const std::string& key) {
    static constexpr std::string_view prefix = "TimeStep";
    if (key.rfind(prefix, 0) != 0) return std::nullopt;
    const std::string digits = key.substr(prefix.size());
    long k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size())
        throw Error(ErrorCode::UnsortableTimestep, "timestep key '" + key + "' has no integer index");
    return k;
}

} // namespace detail

/// Parses a time-series scenario document ("TimeStep<k>" objects).
inline ScenarioTimeline parse_scenario_ts(std::string_view bytes, const std::string& source = "<scenario>") {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::MalformedJson, source + ": " + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::MalformedJson, source + ": top level must be an object");

    ScenarioTimeline t;
    for (const auto& [key, step] : doc.items()) {
        auto k = detail::timestep_number(key);
        if (!k) continue;
        const std::string where = source + ":" + key;
        if (!step.is_object()) throw Error(ErrorCode::MalformedJson, where + ": timestep must be an object");
        Timestep ts;
        ts.index = *k;
        auto ego = step.find("Ego_Position");
        if (ego == step.end() || !ego->is_object()) throw Error(ErrorCode::MissingField, where + ": Ego_Position required");
        ts.ego.position = {detail::number_field(*ego, "px", where), detail::number_field(*ego, "py", where),
                           detail::number_field(*ego, "pz", where)};
        ts.ego.vx = detail::number_field(*ego, "vx", where);
        ts.ego.vy = detail::number_field(*ego, "vy", where);
        ts.ego.acceleration = {detail::number_field(*ego, "ax", where), detail::number_field(*ego, "ay", where),
                               detail::number_field(*ego, "az", where)};
        ts.ego.operation = detail::text_field(step, "Ego_Operation");
        ts.ego.speed = detail::text_field(step, "Ego_Speed");
        ts.ego.throttle = detail::optional_number(step, {"Ego_Throttle", "Ego_throttle"});
        ts.ego.brake = detail::optional_number(step, {"Ego_Brake", "Ego_brake"});
        ts.ego.steering_rate = detail::optional_number(step, {"Ego_SteeringRate", "Ego_steeringRate", "Ego_Steering_Rate"});
        if (!ts.ego.throttle) ts.ego.throttle = detail::optional_number(*ego, {"throttle"});
        if (!ts.ego.brake) ts.ego.brake = detail::optional_number(*ego, {"brake"});
        if (!ts.ego.steering_rate) ts.ego.steering_rate = detail::optional_number(*ego, {"steering_rate", "steeringRate"});
        ts.rain = detail::text_field(step, "Weather[rain]");
        ts.fog = detail::text_field(step, "Weather[fog]");
        ts.wetness = detail::text_field(step, "Weather[wetness]");
        ts.time_of_day = detail::text_field(step, "TimeofDay");
        ts.traffic_light = detail::text_field(step, "TrafficRule[Traffic light]");
        ts.sidewalk = detail::text_field(step, "TrafficRule[Sidewalk]");
        ts.collision = detail::text_field(step, "CollisionInfoAtTimeStep").value_or("NotOccurred");
        detail::parse_participants(step, "NPC", ObstacleKind::NpcVehicle, ts, where);
        detail::parse_participants(step, "Pedestrian", ObstacleKind::Pedestrian, ts, where);
        detail::parse_participants(step, "Static obstacle", ObstacleKind::Static, ts, where);
        t.steps.push_back(std::move(ts));
    }
    if (t.steps.empty()) throw Error(ErrorCode::EmptyTimeline, source + ": no TimeStep entries");
    std::sort(t.steps.begin(), t.steps.end(), [](const Timestep& a, const Timestep& b) { return a.index < b.index; });
    for (std::size_t i = 1; i < t.steps.size(); ++i)
        if (t.steps[i].index == t.steps[i - 1].index)
            throw Error(ErrorCode::UnsortableTimestep, source + ": repeated timestep index " + std::to_string(t.steps[i].index));
    return t;
}

namespace detail {

struct PoolEntry {
    std::size_t step = 0;
    std::string key;
    double kind = 0.0;
    double distance = 0.0;
    std::optional<double> speed, velocity, acceleration, volume, operation;
};

class FeatureWriter {
public:
    explicit FeatureWriter(FeatureVector& fv) : fv_(fv) {}
    void set(const std::string& name, std::optional<double> v) {
        fv_.names.push_back(name);
        fv_.values.push_back(v ? *v : std::numeric_limits<double>::quiet_NaN());
        fv_.missing.push_back(!v.has_value());
    }

private:
    FeatureVector& fv_;
};

// Index of the extreme entry among those with a defined value; ties go to the
// earliest timestep, then the lowest obstacle key.
template <class Get>
std::optional<std::size_t> arg_extreme(const std::vector<PoolEntry>& pool, Get get, bool want_max) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        auto v = get(pool[i]);
        if (!v) continue;
        if (!best) {
            best = i;
            continue;
        }
        const double b = *get(pool[*best]);
        const bool better = want_max ? *v > b : *v < b;
        const bool tie = *v == b && (pool[i].step < pool[*best].step ||
                                     (pool[i].step == pool[*best].step && pool[i].key < pool[*best].key));
        if (better || tie) best = i;
    }
    return best;
}

template <class Get>
std::optional<double> mean_of(const std::vector<PoolEntry>& pool, Get get) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& e : pool)
        if (auto v = get(e)) {
            s += *v;
            ++n;
        }
    if (n == 0) return std::nullopt;
    return s / static_cast<double>(n);
}

inline std::optional<double> encode_speed(const std::optional<nlohmann::json>& s) {
    if (!s) return std::nullopt;
    if (s->is_number()) return s->get<double>();
    if (s->is_string()) return EncodingTables::speed(s->get<std::string>());
    return std::nullopt;
}

} // namespace detail

/// Computes the 61 time-series features of one scenario.
///
/// Scenario background (weather, time of day, traffic rules) and the AV state
/// come from the first timestep. Obstacle statistics pool every
/// (timestep, obstacle) pair of the timeline.
inline FeatureVector extract_dynamic_features(const ScenarioTimeline& t, const EncodingTables& enc,
                                              std::string id = {}) {
    if (t.steps.empty()) throw Error(ErrorCode::EmptyTimeline, "timeline has no timesteps");
    using detail::PoolEntry;
    FeatureVector fv;
    fv.id = std::move(id);
    detail::FeatureWriter w(fv);
    const Timestep& first = t.steps.front();
    auto opt = [](const std::optional<std::string>& s, double (*f)(std::string_view)) -> std::optional<double> {
        if (!s) return std::nullopt;
        return f(*s);
    };

    w.set("AV_acceleration", first.ego.acceleration.norm());
    w.set("AV_throttle", first.ego.throttle);
    w.set("AV_brake", first.ego.brake);
    w.set("AV_steeringRate", first.ego.steering_rate);
    w.set("AV_speed", opt(first.ego.speed, &EncodingTables::speed));
    w.set("AV_velocity", std::hypot(first.ego.vx, first.ego.vy));
    w.set("AV_position", first.ego.position.norm());

    std::array<std::size_t, 3> max_count{0, 0, 0};
    std::vector<PoolEntry> pool;
    bool any_ped = false;
    for (std::size_t s = 0; s < t.steps.size(); ++s) {
        const auto& step = t.steps[s];
        std::array<std::size_t, 3> count{0, 0, 0};
        for (const auto& o : step.obstacles) {
            ++count[static_cast<std::size_t>(o.kind)];
            if (o.kind == ObstacleKind::Pedestrian) any_ped = true;
            PoolEntry e;
            e.step = s;
            e.key = o.key;
            e.kind = EncodingTables::obstacle_kind(o.kind);
            if (o.distance_temp) {
                e.distance = *o.distance_temp;
            } else {
                const Vec3 d{o.position.x - step.ego.position.x, o.position.y - step.ego.position.y,
                             o.position.z - step.ego.position.z};
                e.distance = d.norm();
            }
            e.speed = detail::encode_speed(o.speed);
            e.velocity = o.velocity;
            e.acceleration = o.acceleration;
            if (o.volume) e.volume = EncodingTables::volume(*o.volume);
            if (o.operation) e.operation = enc.operation(*o.operation);
            pool.push_back(std::move(e));
        }
        for (std::size_t k = 0; k < 3; ++k) max_count[k] = std::max(max_count[k], count[k]);
    }
    const auto peds = static_cast<double>(max_count[0]);
    const auto npcs = static_cast<double>(max_count[1]);
    const auto stat = static_cast<double>(max_count[2]);
    const double total = peds + npcs + stat;
    w.set("num_peds", peds);
    w.set("num_NPCs", npcs);
    w.set("num_statObs", stat);
    w.set("tot_obs", total);
    w.set("is_ped", any_ped && total > 1 ? 1.0 : 0.0);
    w.set("traffic_light", opt(first.traffic_light, &EncodingTables::traffic_light));
    w.set("Sidewalk", opt(first.sidewalk, &EncodingTables::sidewalk));
    w.set("rain", opt(first.rain, &EncodingTables::weather));
    w.set("fog", opt(first.fog, &EncodingTables::weather));
    w.set("wetness", opt(first.wetness, &EncodingTables::weather));
    w.set("time_of_day", opt(first.time_of_day, &EncodingTables::time_of_day));

    auto dist = [](const PoolEntry& e) -> std::optional<double> { return e.distance; };
    auto speed = [](const PoolEntry& e) { return e.speed; };
    auto vel = [](const PoolEntry& e) { return e.velocity; };
    auto acc = [](const PoolEntry& e) { return e.acceleration; };
    auto vol = [](const PoolEntry& e) { return e.volume; };
    auto attr = [&](std::optional<std::size_t> idx, auto get) -> std::optional<double> {
        if (!idx) return std::nullopt;
        return get(pool[*idx]);
    };
    auto kind = [](const PoolEntry& e) -> std::optional<double> { return e.kind; };
    auto op = [](const PoolEntry& e) { return e.operation; };

    const auto max_d = detail::arg_extreme(pool, dist, true);
    const auto min_d = detail::arg_extreme(pool, dist, false);
    w.set("avg_obsDist", detail::mean_of(pool, dist));
    w.set("max_obsDist", attr(max_d, dist));
    w.set("min_obsDist", attr(min_d, dist));
    w.set("type_maxDistObs", attr(max_d, kind));
    w.set("type_minDistObs", attr(min_d, kind));
    w.set("op_maxDistObs", attr(max_d, op));
    w.set("op_minDistObs", attr(min_d, op));
    w.set("vol_minDistObs", attr(min_d, vol));
    w.set("speed_minDistObs", attr(min_d, speed));
    w.set("dist_minDistObs", attr(min_d, dist));

    const auto max_s = detail::arg_extreme(pool, speed, true);
    const auto min_s = detail::arg_extreme(pool, speed, false);
    w.set("avg_obsSpeed", detail::mean_of(pool, speed));
    w.set("max_obsSpeed", attr(max_s, speed));
    w.set("min_obsSpeed", attr(min_s, speed));
    w.set("type_maxSpeedObs", attr(max_s, kind));
    w.set("type_minSpeedObs", attr(min_s, kind));
    w.set("op_maxSpeedObs", attr(max_s, op));
    w.set("op_minSpeedObs", attr(min_s, op));
    w.set("vol_minSpeedObs", attr(min_s, vol));
    w.set("speed_minSpeedObs", attr(min_s, speed));
    w.set("dist_maxSpeedObs", attr(max_s, dist));

    const auto max_v = detail::arg_extreme(pool, vel, true);
    const auto min_v = detail::arg_extreme(pool, vel, false);
    w.set("avg_obsVel", detail::mean_of(pool, vel));
    w.set("max_obsVel", attr(max_v, vel));
    w.set("min_obsVel", attr(min_v, vel));
    w.set("type_maxVelObs", attr(max_v, kind));
    w.set("type_minVelObs", attr(min_v, kind));
    w.set("op_maxVelObs", attr(max_v, op));
    w.set("op_minVelObs", attr(min_v, op));
    w.set("vol_minVelObs", attr(min_v, vol));

    const auto max_a = detail::arg_extreme(pool, acc, true);
    const auto min_a = detail::arg_extreme(pool, acc, false);
    w.set("avg_obsAcc", detail::mean_of(pool, acc));
    w.set("min_obsAcc", attr(min_a, acc));
    w.set("max_obsAcc", attr(max_a, acc));
    w.set("type_maxAccObs", attr(max_a, kind));
    w.set("type_minAccObs", attr(min_a, kind));
    w.set("op_maxAccObs", attr(max_a, op));
    w.set("op_minAccObs", attr(min_a, op));
    w.set("vol_maxAccObs", attr(max_a, vol));

    const auto max_vol = detail::arg_extreme(pool, vol, true);
    const auto min_vol = detail::arg_extreme(pool, vol, false);
    w.set("avg_obsVol", detail::mean_of(pool, vol));
    w.set("max_obsVol", attr(max_vol, vol));
    w.set("min_obsVol", attr(min_vol, vol));
    w.set("type_maxVolObs", attr(max_vol, kind));
    w.set("type_minVolObs", attr(min_vol, kind));
    w.set("op_maxVolObs", attr(max_vol, op));
    w.set("op_minVolObs", attr(min_vol, op));

    fv.outcome = Outcome::Safe;
    for (const auto& step : t.steps)
        if (step.collision != "NotOccurred") fv.outcome = Outcome::Unsafe;
    return fv;
}

/// Parses a road test document with "road_points" and "test_outcome".
/// Consecutive duplicate points are collapsed.
inline RoadTest parse_road(std::string_view bytes, const std::string& source = "<road>") {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::MalformedJson, source + ": " + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::MalformedJson, source + ": top level must be an object");
    RoadTest r;
    if (auto id = doc.find("test_id"); id != doc.end() && id->is_string()) r.test_id = id->get<std::string>();
    auto pts = doc.find("road_points");
    if (pts == doc.end() || !pts->is_array()) throw Error(ErrorCode::MissingField, source + ": road_points array required");
    for (std::size_t i = 0; i < pts->size(); ++i) {
        const auto& p = (*pts)[i];
        if (!p.is_array() || p.size() < 2 || !p[0].is_number() || !p[1].is_number())
            throw Error(ErrorCode::MalformedPoint, source + ": road_points[" + std::to_string(i) + "] is not an [x, y] pair");
        Point2 q{p[0].get<double>(), p[1].get<double>()};
        if (!std::isfinite(q.x) || !std::isfinite(q.y))
            throw Error(ErrorCode::MalformedPoint, source + ": road_points[" + std::to_string(i) + "] not finite");
        if (!r.road_points.empty() && r.road_points.back() == q) continue;
        r.road_points.push_back(q);
    }
    if (r.road_points.size() < 2)
        throw Error(ErrorCode::TooFewPoints, source + ": at least two distinct road points required");
    auto out = doc.find("test_outcome");
    if (out == doc.end() || !out->is_string()) throw Error(ErrorCode::MissingField, source + ": test_outcome required");
    const auto o = csv::lower(out->get<std::string>());
    if (o == "fail") {
        r.outcome = Outcome::Unsafe;
    } else if (o == "pass") {
        r.outcome = Outcome::Safe;
    } else {
        throw Error(ErrorCode::UnknownCategory, source + ": test_outcome '" + out->get<std::string>() + "'");
    }
    if (auto v = doc.find("is_valid"); v != doc.end() && v->is_boolean()) r.valid = v->get<bool>();
    return r;
}

/// Straight/turn classification of road vertices. A vertex is straight when
/// its heading change, rescaled to `reference_length_m` of arc, stays below
/// `straight_angle_deg`. Angles are reported in degrees.
struct RoadSegmentation {
    double straight_angle_deg = 5.0;
    double reference_length_m = 10.0;

    std::string describe() const {
        std::ostringstream os;
        os << "straight threshold " << straight_angle_deg << " deg per " << reference_length_m
           << " m of arc; angle unit degrees";
        return os.str();
    }
};

namespace detail {

inline double circumradius(const Point2& a, const Point2& b, const Point2& c) {
    const double ab = std::hypot(b.x - a.x, b.y - a.y);
    const double bc = std::hypot(c.x - b.x, c.y - b.y);
    const double ca = std::hypot(a.x - c.x, a.y - c.y);
    const double cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (std::abs(cross) <= 1e-12 * ab * bc) return std::numeric_limits<double>::infinity();
    return ab * bc * ca / (2.0 * std::abs(cross));
}

struct Summary {
    double min = 0, max = 0, mean = 0, median = 0, stddev = 0;
};

inline Summary summarize(std::vector<double> v) {
    Summary s;
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    s.min = v.front();
    s.max = v.back();
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(n);
    s.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(n));
    return s;
}

} // namespace detail

/// Computes the 15 structural road features.
inline FeatureVector extract_road_features(const RoadTest& r, const RoadSegmentation& seg = {}) {
    const auto& p = r.road_points;
    if (p.size() < 2) throw Error(ErrorCode::TooFewPoints, r.test_id + ": at least two road points required");
    FeatureVector fv;
    fv.id = r.test_id;
    fv.outcome = r.outcome;
    detail::FeatureWriter w(fv);

    double distance = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) distance += std::hypot(p[i].x - p[i - 1].x, p[i].y - p[i - 1].y);

    // Per interior vertex: signed heading change (deg, + = counterclockwise) and class.
    const std::size_t nv = p.size() >= 3 ? p.size() - 2 : 0;
    std::vector<double> turn(nv);
    std::vector<int> cls(nv); // -1 right, 0 straight, +1 left
    for (std::size_t k = 0; k < nv; ++k) {
        const auto& a = p[k];
        const auto& b = p[k + 1];
        const auto& c = p[k + 2];
        const double ux = b.x - a.x, uy = b.y - a.y, vx = c.x - b.x, vy = c.y - b.y;
        const double ang = std::atan2(ux * vy - uy * vx, ux * vx + uy * vy) * 180.0 / std::numbers::pi;
        const double arc = 0.5 * (std::hypot(ux, uy) + std::hypot(vx, vy));
        const double scaled = std::abs(ang) * seg.reference_length_m / arc;
        turn[k] = ang;
        cls[k] = scaled < seg.straight_angle_deg ? 0 : (ang > 0 ? 1 : -1);
    }

    std::vector<double> angles, pivots;
    int lefts = 0, rights = 0, straights = 0;
    if (nv == 0) straights = 1;
    for (std::size_t k = 0; k < nv;) {
        std::size_t e = k;
        while (e < nv && cls[e] == cls[k]) ++e;
        if (cls[k] == 0) {
            ++straights;
        } else {
            double total = 0.0, rsum = 0.0;
            std::size_t rcount = 0;
            for (std::size_t m = k; m < e; ++m) {
                total += std::abs(turn[m]);
                const double rad = detail::circumradius(p[m], p[m + 1], p[m + 2]);
                if (std::isfinite(rad)) {
                    rsum += rad;
                    ++rcount;
                }
            }
            angles.push_back(total);
            if (rcount > 0) pivots.push_back(rsum / static_cast<double>(rcount));
            (cls[k] > 0 ? lefts : rights) += 1;
        }
        k = e;
    }

    auto put_stats = [&](const char* base, const std::vector<double>& v, bool with_total) {
        const std::string b(base);
        std::optional<detail::Summary> s;
        if (!v.empty()) s = detail::summarize(v);
        auto f = [&](double detail::Summary::*m) -> std::optional<double> {
            if (!s) return std::nullopt;
            return (*s).*m;
        };
        w.set("min_" + b, f(&detail::Summary::min));
        w.set("max_" + b, f(&detail::Summary::max));
        w.set("mean_" + b, f(&detail::Summary::mean));
        w.set("median_" + b, f(&detail::Summary::median));
        w.set("std_" + b, f(&detail::Summary::stddev));
        if (with_total) {
            std::optional<double> tot;
            if (!v.empty()) {
                tot = 0.0;
                for (double x : v) *tot += x;
            }
            w.set("total_" + b, tot);
        }
    };
    put_stats("angle", angles, true);
    put_stats("pivot_off", pivots, false);
    w.set("num_l_turns", lefts);
    w.set("num_r_turns", rights);
    w.set("num_straights", straights);
    w.set("road_distance", distance);
    return fv;
}

/// Assembles extracted vectors into a metadata table (column order of the first vector).
inline MetadataTable to_table(const std::vector<FeatureVector>& vectors) {
    if (vectors.empty()) throw Error(ErrorCode::NoRows, "no scenarios extracted");
    MetadataTable t;
    t.feature_names = vectors.front().names;
    const auto n = static_cast<Eigen::Index>(vectors.size());
    const auto p = static_cast<Eigen::Index>(t.feature_names.size());
    t.values.resize(n, p);
    t.missing.resize(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& v = vectors[static_cast<std::size_t>(i)];
        if (v.names != t.feature_names) throw Error(ErrorCode::DimensionMismatch, "feature layout differs for " + v.id);
        t.instance_ids.push_back(v.id);
        t.outcomes.push_back(v.outcome);
        for (Eigen::Index j = 0; j < p; ++j) {
            t.values(i, j) = v.values[static_cast<std::size_t>(j)];
            t.missing(i, j) = v.missing[static_cast<std::size_t>(j)];
        }
    }
    t.validate();
    return t;
}

enum class ScenarioFormat { TimeSeries, Road };

struct ExtractionResult {
    MetadataTable table;
    std::vector<std::string> skipped; // invalid road tests
    std::string report_header;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Lexicographically ordered *.json files of a directory (or the file itself).
inline std::vector<std::filesystem::path> scenario_files(const std::filesystem::path& input) {
    namespace fs = std::filesystem;
    if (!fs::exists(input)) throw Error(ErrorCode::Io, "input not found: " + input.string());
    std::vector<fs::path> files;
    if (fs::is_directory(input)) {
        for (const auto& e : fs::directory_iterator(input))
            if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(input);
    }
    if (files.empty()) throw Error(ErrorCode::NoRows, "no .json scenario files under " + input.string());
    return files;
}

inline ExtractionResult extract_files(const std::vector<std::filesystem::path>& files, ScenarioFormat format,
                                      const RoadSegmentation& seg = {}) {
    ExtractionResult out;
    std::vector<FeatureVector> vectors(files.size());
    if (format == ScenarioFormat::TimeSeries) {
        std::vector<ScenarioTimeline> timelines(files.size());
        parallel_for(files.size(), [&](std::size_t i) {
            timelines[i] = parse_scenario_ts(read_file(files[i]), files[i].string());
        });
        const auto enc = build_encodings(timelines);
        parallel_for(files.size(), [&](std::size_t i) {
            vectors[i] = extract_dynamic_features(timelines[i], enc, files[i].stem().string());
        });
        out.report_header = "time-series features (61); operations enumerated alphabetically: " +
                            std::to_string(enc.operations.size());
    } else {
        std::vector<std::optional<FeatureVector>> maybe(files.size());
        std::vector<std::string> names(files.size());
        parallel_for(files.size(), [&](std::size_t i) {
            auto road = parse_road(read_file(files[i]), files[i].string());
            road.test_id = files[i].stem().string();
            names[i] = road.test_id;
            if (road.valid) maybe[i] = extract_road_features(road, seg);
        });
        vectors.clear();
        for (std::size_t i = 0; i < files.size(); ++i) {
            if (maybe[i]) {
                vectors.push_back(std::move(*maybe[i]));
            } else {
                out.skipped.push_back(names[i]);
            }
        }
        out.report_header = "road features (15); " + seg.describe();
    }
    out.table = to_table(vectors);
    return out;
}

inline ExtractionResult extract_directory(const std::filesystem::path& input, ScenarioFormat format,
                                          const RoadSegmentation& seg = {}) {
    return extract_files(scenario_files(input), format, seg);
}

} // namespace isa::extraction

#endif // ISA_EXTRACTION_HPP
