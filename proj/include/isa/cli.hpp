#ifndef ISA_CLI_HPP
#define ISA_CLI_HPP

#include "isa/classifiers.hpp"
#include "isa/common.hpp"
#include "isa/coverage.hpp"
#include "isa/extraction.hpp"
#include "isa/feature_selection.hpp"
#include "isa/metadata.hpp"
#include "isa/pilot.hpp"
#include "isa/prediction.hpp"
#include "isa/preprocess.hpp"
#include "isa/svg.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace isa::cli {

inline constexpr const char* version = "0.1.0";
inline constexpr const char* output_env = "ISA_OUTPUT_DIR";

namespace fs = std::filesystem;
using nlohmann::json;

struct RunConfig {
    std::uint64_t seed = 0;
    std::string input;                 // scenario directory or file (extract)
    std::string format = "timeseries"; // timeseries | road
    std::string out_dir = "isa_run";
    unsigned workers = 0;
    std::string metadata;   // raw metadata CSV; default <out>/metadata.csv
    std::string normalized; // default <out>/normalized.csv
    double theta_redundant = 0.95;
    double theta_weak = 0.10;
    double theta_strong = 0.7;
    double straight_angle = 5.0;
    double reference_length = 10.0;
    std::size_t k_min = 2;
    std::size_t k_max = 0; // 0 => min(15, p - 1)
    std::size_t budget = selection::default_budget;
    int restarts = 30;
    std::size_t repetitions = 10;
    double train_fraction = 0.8;
    std::string classifier = "all";
    std::string test;  // optional held-out metadata CSV for compare / predict input
    std::string model; // classifier JSON for predict
    std::vector<std::string> colour_by;

    json to_json() const {
        return {{"seed", seed},
                {"input", input},
                {"format", format},
                {"metadata", metadata},
                {"normalized", normalized},
                {"theta_redundant", theta_redundant},
                {"theta_weak", theta_weak},
                {"theta_strong", theta_strong},
                {"straight_angle", straight_angle},
                {"reference_length", reference_length},
                {"k_min", k_min},
                {"k_max", k_max},
                {"budget", budget},
                {"restarts", restarts},
                {"repetitions", repetitions},
                {"train_fraction", train_fraction},
                {"classifier", classifier},
                {"test", test},
                {"colour_by", colour_by}};
    }

    void validate() const {
        auto fail = [](const std::string& m) { throw CLI::ValidationError(m); };
        if (!(theta_redundant > 0.0 && theta_redundant <= 1.0)) fail("--theta-redundant must lie in (0, 1]");
        if (!(theta_weak >= 0.0 && theta_weak < 1.0)) fail("--theta-weak must lie in [0, 1)");
        if (!(theta_strong > 0.0 && theta_strong <= 1.0)) fail("--theta-strong must lie in (0, 1]");
        if (!(straight_angle > 0.0)) fail("--straight-angle must be positive");
        if (!(reference_length > 0.0)) fail("--reference-length must be positive");
        if (k_min < 2) fail("--k-min must be at least 2");
        if (k_max != 0 && k_max < k_min) fail("--k-max must not be below --k-min");
        if (budget < 1) fail("--budget must be at least 1");
        if (restarts < 1) fail("--restarts must be at least 1");
        if (repetitions < 5) fail("--repetitions must be at least 5");
        if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail("--train-fraction must lie in (0, 1)");
        if (format != "timeseries" && format != "road") fail("--format must be timeseries or road");
    }
};

// ---- run directory ------------------------------------------------------------

class RunDir {
public:
    explicit RunDir(const RunConfig& cfg) : cfg_(cfg), root_(cfg.out_dir) {}

    fs::path root() const { return root_; }
    fs::path path(const std::string& name) const { return root_ / name; }
    fs::path metadata() const { return cfg_.metadata.empty() ? path("metadata.csv") : fs::path(cfg_.metadata); }
    fs::path normalized() const { return cfg_.normalized.empty() ? path("normalized.csv") : fs::path(cfg_.normalized); }

    void ensure() const { fs::create_directories(root_); }

    void write(const std::string& name, const std::string& content) const {
        const auto p = path(name);
        fs::create_directories(p.parent_path());
        const auto tmp = fs::path(p.string() + ".tmp");
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) throw Error(ErrorCode::Io, "cannot write " + p.string());
            out << content;
        }
        fs::rename(tmp, p);
    }

    void write_json(const std::string& name, const json& j) const { write(name, j.dump(2) + "\n"); }

    json read_json(const fs::path& p) const {
        const auto text = extraction::read_file(p);
        try {
            return json::parse(text);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::MalformedJson, p.string() + ": " + e.what());
        }
    }

private:
    const RunConfig& cfg_;
    fs::path root_;
};

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorCode::Io, "SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

// ---- stages -------------------------------------------------------------------

struct StageLog {
    std::vector<std::pair<std::string, double>> timings;
    json summary = json::object();
};

inline void stage_extract(const RunConfig& cfg, const RunDir& run, StageLog& log) {
    if (cfg.input.empty()) throw CLI::ValidationError("extract needs --input");
    const auto format = cfg.format == "road" ? extraction::ScenarioFormat::Road : extraction::ScenarioFormat::TimeSeries;
    const auto res = extraction::extract_directory(cfg.input, format, {cfg.straight_angle, cfg.reference_length});
    run.ensure();
    std::ostringstream csv;
    write_metadata(res.table, csv);
    run.write("metadata.csv", csv.str());
    std::string report = res.report_header + "\ninstances " + std::to_string(res.table.rows()) + "\n";
    for (const auto& s : res.skipped) report += "skipped invalid test " + s + "\n";
    run.write("extraction_report.txt", report);
    log.summary["instances"] = res.table.rows();
    log.summary["skipped"] = res.skipped.size();
    std::cout << "extracted " << res.table.rows() << " instances (" << res.skipped.size() << " skipped)\n";
}

inline void stage_preprocess(const RunConfig& cfg, const RunDir& run, StageLog& log) {
    const auto raw = load_metadata(run.metadata());
    const auto r = preprocess::preprocess(raw, {cfg.theta_redundant, cfg.theta_weak});
    run.ensure();
    std::ostringstream csv;
    write_metadata(r.normalized, csv);
    run.write("normalized.csv", csv.str());
    run.write_json("normalization.json",
                   {{"features", r.params.names}, {"mean", r.params.mean}, {"stddev", r.params.stddev}});
    run.write("prune_report.csv", r.report.to_csv());
    run.write("prune_report.txt", r.report.to_text());
    log.summary["retained_features"] = r.params.names.size();
    std::cout << "retained " << r.params.names.size() << " of " << raw.cols() << " features\n";
}

inline preprocess::NormalizationParams load_normalization(const RunDir& run) {
    const auto j = run.read_json(run.path("normalization.json"));
    preprocess::NormalizationParams p;
    try {
        p.names = j.at("features").get<std::vector<std::string>>();
        p.mean = j.at("mean").get<std::vector<double>>();
        p.stddev = j.at("stddev").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedJson, run.path("normalization.json").string() + ": " + e.what());
    }
    return p;
}

inline std::vector<std::string> load_selected(const RunDir& run) {
    const auto p = run.path("selected.json");
    try {
        return run.read_json(p).at("features").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedJson, p.string() + ": " + e.what());
    }
}

inline void stage_select(const RunConfig& cfg, const RunDir& run, StageLog& log) {
    const auto table = load_metadata(run.normalized());
    const auto corr = preprocess::correlations(table);
    std::vector<std::string> names;
    json clustering_json;
    selection::SelectedFeatures sel;
    if (table.cols() < 3) {
        // too few features to cluster: each one is its own cluster
        selection::FeatureClustering fc;
        fc.names = table.feature_names;
        fc.k = table.cols();
        for (std::size_t i = 0; i < fc.k; ++i) {
            fc.assignment.push_back(i);
            fc.medoids.push_back(i);
        }
        sel = selection::select_features(table, fc, cfg.budget, cfg.seed);
        clustering_json = {{"k", fc.k}};
    } else {
        auto [lo, hi] = selection::default_k_range(table.cols());
        lo = cfg.k_min;
        if (cfg.k_max != 0) hi = std::min(cfg.k_max, table.cols() - 1);
        const auto fc = selection::cluster_features(corr, lo, hi, cfg.seed);
        json clusters = json::array();
        for (const auto& m : fc.members()) {
            std::vector<std::string> n;
            for (auto i : m) n.push_back(fc.names[i]);
            clusters.push_back(n);
        }
        json sil = json::array();
        for (const auto& [k, s] : fc.silhouettes) sil.push_back({{"k", k}, {"silhouette", s}});
        clustering_json = {{"k", fc.k}, {"clusters", clusters}, {"silhouettes", sil}};
        sel = selection::select_features(table, fc, cfg.budget, cfg.seed);
    }
    run.write("selection.csv", sel.to_csv(table.feature_names));
    run.write_json("selected.json", {{"features", sel.names},
                                     {"error", sel.best.error},
                                     {"clustering", clustering_json},
                                     {"combinations_total", sel.total_combinations},
                                     {"combinations_evaluated", sel.evaluated.size()},
                                     {"sampled", sel.sampled}});
    log.summary["selected_features"] = sel.names;
    log.summary["selection_error"] = sel.best.error;
    std::cout << "selected " << sel.names.size() << " features, CV error " << sel.best.error << "\n";
}

inline void stage_project(const RunConfig& cfg, const RunDir& run, StageLog& log) {
    const auto table = load_metadata(run.normalized());
    const auto params = load_normalization(run);
    const auto features = load_selected(run);
    pilot::FitOptions opt;
    opt.restarts = cfg.restarts;
    opt.seed = cfg.seed;
    const auto model = pilot::fit_table(table, features, params, opt);
    const auto space = pilot::build_space(model, table);
    run.write_json("model.json", pilot::to_json(model));
    run.write("space.csv", space.to_csv());
    log.summary["pilot_objective"] = model.objective;
    std::cout << "PILOT objective " << model.objective << "\n";
}

inline pilot::InstanceSpace load_space(const RunDir& run, pilot::ProjectionModel& model) {
    model = pilot::model_from_json(run.read_json(run.path("model.json")));
    return pilot::build_space(model, load_metadata(run.normalized()));
}

inline void stage_coverage(const RunConfig& cfg, const RunDir& run, StageLog& log) {
    pilot::ProjectionModel model;
    const auto space = load_space(run, model);
    const auto table = load_metadata(run.normalized()).select_columns(model.features);
    const auto rho = preprocess::correlations(table).features;
    const auto rep = coverage::compute_coverage(space, model, rho, {cfg.theta_strong, std::nullopt});
    run.write_json("coverage.json", rep.to_json());
    log.summary["area_IS"] = rep.area_is;
    log.summary["area_bound"] = rep.area_bound;
    log.summary["coverage_percent"] = coverage::round2(rep.coverage_percent);
    std::cout << "coverage " << coverage::round2(rep.coverage_percent) << "% (area_IS " << rep.area_is << ", area_bound "
              << rep.area_bound << ")\n";
}

inline std::vector<ml::ClassifierKind> requested_kinds(const RunConfig& cfg) {
    if (cfg.classifier == "all") return {ml::all_kinds.begin(), ml::all_kinds.end()};
    try {
        return {ml::kind_from_string(cfg.classifier)};
    } catch (const Error&) {
        throw CLI::ValidationError("--classifier must be one of RF, DT, KNN, MLP, NB or all");
    }
}

inline void stage_train(const RunConfig& cfg, const RunDir& run, StageLog& log) {
    const auto table = load_metadata(run.metadata());
    const auto features = load_selected(run);
    json trained = json::array();
    for (auto kind : requested_kinds(cfg)) {
        ml::ClassifierSpec spec;
        spec.kind = kind;
        spec.seed = cfg.seed;
        const auto model = prediction::train_on_table(spec, table, features);
        run.write_json("classifiers/" + ml::to_string(kind) + ".json", prediction::to_json(model));
        trained.push_back(ml::to_string(kind));
    }
    log.summary["classifiers"] = trained;
    std::cout << "trained " << trained.size() << " classifier(s)\n";
}

inline void stage_predict(const RunConfig& cfg, const RunDir& run, StageLog& log) {
    if (cfg.model.empty()) throw CLI::ValidationError("predict needs --model");
    if (cfg.test.empty()) throw CLI::ValidationError("predict needs --test with the metadata CSV to classify");
    const auto model = prediction::table_model_from_json(run.read_json(cfg.model));
    const auto table = load_metadata(cfg.test);
    const auto pred = prediction::predict_table(model, table);
    std::string out = "id,predicted,outcome\n";
    for (std::size_t i = 0; i < pred.size(); ++i)
        out += csv::quote(table.instance_ids[i]) + ',' + (pred[i] ? "unsafe" : "safe") + ',' +
               (table.outcomes[i] == Outcome::Unsafe ? "unsafe" : "safe") + '\n';
    run.ensure();
    run.write("predictions.csv", out);
    const auto e = stats::evaluate(pred, table.outcome_ints());
    log.summary["precision"] = e.precision;
    log.summary["recall"] = e.recall;
    log.summary["f1"] = e.f1;
    std::cout << "precision " << e.precision << " recall " << e.recall << " f1 " << e.f1 << "\n";
}

inline void stage_compare(const RunConfig& cfg, const RunDir& run, StageLog& log) {
    const auto table = load_metadata(run.metadata());
    const auto features = load_selected(run);
    const auto pool = load_normalization(run).names;
    prediction::CompareOptions opt;
    opt.repetitions = cfg.repetitions;
    opt.train_fraction = cfg.train_fraction;
    opt.seed = cfg.seed;
    opt.kinds = requested_kinds(cfg);
    std::optional<MetadataTable> test;
    if (!cfg.test.empty()) test = load_metadata(cfg.test);
    const auto rep = prediction::compare_isa_vs_random(table, features, pool, opt, test ? &*test : nullptr);
    run.write("comparison.csv", rep.to_csv());
    run.write_json("comparison.json", rep.to_json());
    json f1 = json::object();
    for (auto k : opt.kinds) {
        const auto& s = rep.summary(k, "f1");
        f1[ml::to_string(k)] = {{"isa", s.mean_isa}, {"random", s.mean_random}, {"p_value", s.p}};
        std::cout << ml::to_string(k) << " F1 isa " << s.mean_isa << " random " << s.mean_random << " p " << s.p << "\n";
    }
    log.summary["f1"] = f1;
}

inline std::vector<geometry::Region> regions_from_json(const json& a) {
    std::vector<geometry::Region> out;
    auto ring = [](const json& r) {
        geometry::Polygon p;
        for (const auto& v : r) p.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        return p;
    };
    for (const auto& r : a) {
        geometry::Region g;
        g.outer = ring(r.at("outer"));
        for (const auto& h : r.at("holes")) g.holes.push_back(ring(h));
        out.push_back(std::move(g));
    }
    return out;
}

inline void stage_plot(const RunConfig& cfg, const RunDir& run, StageLog& log) {
    pilot::ProjectionModel model;
    const auto space = load_space(run, model);
    svg::Overlay overlay;
    if (fs::exists(run.path("coverage.json"))) {
        const auto cov = run.read_json(run.path("coverage.json"));
        try {
            geometry::Polygon b;
            for (const auto& v : cov.at("boundary")) b.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
            overlay.boundary = b;
            overlay.footprints = regions_from_json(cov.at("covered"));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::MalformedJson, run.path("coverage.json").string() + ": " + e.what());
        }
    }
    auto targets = cfg.colour_by;
    if (targets.empty()) {
        targets.push_back("outcome");
        targets.insert(targets.end(), model.features.begin(), model.features.end());
    }
    for (const auto& t : targets) run.write("plots/" + t + ".svg", svg::render_svg(space, t, overlay));
    log.summary["plots"] = targets.size();
    std::cout << "wrote " << targets.size() << " plot(s)\n";
}

inline json digests(const RunDir& run) {
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(run.root()))
        if (e.is_regular_file()) {
            const auto rel = fs::relative(e.path(), run.root()).generic_string();
            if (rel != "manifest.json") files.push_back(rel);
        }
    std::sort(files.begin(), files.end());
    json d = json::object();
    for (const auto& f : files) d[f] = sha256_hex(extraction::read_file(run.path(f)));
    return d;
}

inline void write_manifest(const RunConfig& cfg, const RunDir& run, const StageLog& log) {
    json timings = json::array();
    for (const auto& [name, secs] : log.timings) timings.push_back({{"stage", name}, {"seconds", secs}});
    run.write_json("manifest.json", {{"tool", "isa"},
                                     {"version", version},
                                     {"config", cfg.to_json()},
                                     {"timings", timings},
                                     {"results", log.summary},
                                     {"digests", digests(run)}});
}

using Stage = void (*)(const RunConfig&, const RunDir&, StageLog&);

inline void timed(const char* name, Stage stage, const RunConfig& cfg, const RunDir& run, StageLog& log) {
    const auto t0 = std::chrono::steady_clock::now();
    stage(cfg, run, log);
    log.timings.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

inline void stage_pipeline(const RunConfig& cfg, const RunDir& run, StageLog& log) {
    run.ensure();
    if (!cfg.input.empty()) {
        timed("extract", stage_extract, cfg, run, log);
    } else if (!cfg.metadata.empty()) {
        if (!fs::exists(cfg.metadata)) throw Error(ErrorCode::Io, "metadata file not found: " + cfg.metadata);
        if (fs::weakly_canonical(cfg.metadata) != fs::weakly_canonical(run.path("metadata.csv")))
            fs::copy_file(cfg.metadata, run.path("metadata.csv"), fs::copy_options::overwrite_existing);
    } else {
        throw CLI::ValidationError("pipeline needs --input (scenario files) or --metadata (CSV)");
    }
    RunConfig inner = cfg;
    inner.metadata.clear();
    inner.normalized.clear();
    const RunDir r2(inner);
    timed("preprocess", stage_preprocess, inner, r2, log);
    timed("select", stage_select, inner, r2, log);
    timed("project", stage_project, inner, r2, log);
    timed("coverage", stage_coverage, inner, r2, log);
    timed("train", stage_train, inner, r2, log);
    timed("compare", stage_compare, inner, r2, log);
    timed("plot", stage_plot, inner, r2, log);
}

// ---- entry point ------------------------------------------------------------

/// Parses arguments and runs one subcommand. Returns 0 on success, 1 on a
/// usage error and 2 on a data error.
inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
    CLI::App app{"Instance space analysis for autonomous-vehicle test suites", "isa"};
    app.set_version_flag("--version", version);
    app.set_config("--config", "", "key=value configuration file; command-line flags take precedence");
    app.require_subcommand(1, 1);

    RunConfig cfg;
    app.add_option("--seed", cfg.seed, "master random seed")->required();
    app.add_option("--out", cfg.out_dir, "run directory")->envname(output_env)->capture_default_str();
    app.add_option("--workers", cfg.workers, "worker threads (0 = all cores)");
    app.add_option("--input", cfg.input, "scenario JSON directory or file");
    app.add_option("--format", cfg.format, "timeseries or road")->capture_default_str();
    app.add_option("--metadata", cfg.metadata, "raw metadata CSV (default <out>/metadata.csv)");
    app.add_option("--normalized", cfg.normalized, "standardized metadata CSV (default <out>/normalized.csv)");
    app.add_option("--theta-redundant", cfg.theta_redundant)->capture_default_str();
    app.add_option("--theta-weak", cfg.theta_weak)->capture_default_str();
    app.add_option("--theta-strong", cfg.theta_strong)->capture_default_str();
    app.add_option("--straight-angle", cfg.straight_angle, "degrees per reference length")->capture_default_str();
    app.add_option("--reference-length", cfg.reference_length, "metres of arc")->capture_default_str();
    app.add_option("--k-min", cfg.k_min)->capture_default_str();
    app.add_option("--k-max", cfg.k_max, "0 = min(15, p - 1)")->capture_default_str();
    app.add_option("--budget", cfg.budget, "maximum feature combinations scored")->capture_default_str();
    app.add_option("--restarts", cfg.restarts, "PILOT restarts")->capture_default_str();
    app.add_option("--repetitions", cfg.repetitions)->capture_default_str();
    app.add_option("--train-fraction", cfg.train_fraction)->capture_default_str();
    app.add_option("--classifier", cfg.classifier, "RF, DT, KNN, MLP, NB or all")->capture_default_str();
    app.add_option("--test", cfg.test, "held-out metadata CSV");
    app.add_option("--model", cfg.model, "classifier JSON for predict");
    app.add_option("--colour-by", cfg.colour_by, "outcome or feature names to plot");

    const std::vector<std::pair<std::string, Stage>> commands{
        {"extract", stage_extract},   {"preprocess", stage_preprocess}, {"select", stage_select},
        {"project", stage_project},   {"coverage", stage_coverage},     {"train", stage_train},
        {"predict", stage_predict},   {"compare", stage_compare},       {"plot", stage_plot},
        {"pipeline", stage_pipeline}};
    for (const auto& [name, _] : commands) app.add_subcommand(name)->fallthrough();

    try {
        app.parse(argc, argv);
        cfg.validate();
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    }
    set_worker_count(cfg.workers);

    const RunDir run_dir(cfg);
    StageLog log;
    try {
        for (const auto& [name, stage] : commands) {
            if (!app.got_subcommand(name)) continue;
            timed(name.c_str(), stage, cfg, run_dir, log);
            if (name == "pipeline") write_manifest(cfg, run_dir, log);
        }
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "data error: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        err << "data error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

inline int run(const std::vector<std::string>& args, std::ostream& err = std::cerr) {
    std::vector<const char*> argv{"isa"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), err);
}

} // namespace isa::cli

#endif // ISA_CLI_HPP
