#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "alpha_filtration.hpp"
#include "data_io.hpp"
#include "distribution_fit.hpp"
#include "errors.hpp"
#include "fractal_analysis.hpp"
#include "geometry.hpp"
#include "homology.hpp"

namespace celltopo {

using Json = nlohmann::ordered_json;

struct RunConfig {
    // input: exactly one of these
    std::optional<std::string> points_file;
    std::optional<std::string> opencellid_file;
    bool uniform = false;
    bool fractal = false;

    std::optional<int> mcc;
    double dedup_epsilon_km = 0.001;
    std::size_t n = 2000;
    double side = 100.0;
    int levels = 3;
    int branching = 5;
    double scale_ratio = 0.15;
    int leaf_points = 20;
    double jitter = 0.3;

    bool detect = true;
    bool hurst = true;
    bool fit = true;
    RippleOptions ripple;
    PeakOptions peak;
    std::size_t trials = 100;
    std::size_t min_series_len = 256;
    std::optional<double> radius_min, radius_max;
    std::size_t chi_grid = 1000;
    double parsimony_tolerance = 0.10;

    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::size_t max_points = 2'000'000;
    bool allow_large = false;

    int input_count() const {
        return int(points_file.has_value()) + int(opencellid_file.has_value()) + int(uniform) + int(fractal);
    }
};

inline void validate(const RunConfig& c, bool needs_input = true) {
    auto bad = [](const std::string& m) { fail(Category::InvalidConfig, m); };
    if (needs_input && c.input_count() != 1)
        bad("exactly one input source is required (--input, --opencellid, --uniform or --fractal), got " +
            std::to_string(c.input_count()));
    if (c.mcc && !c.opencellid_file) bad("--mcc applies only to --opencellid input");
    if (!(c.dedup_epsilon_km >= 0.0)) bad("dedup-eps must be non-negative");
    if (c.uniform && c.n < 1) bad("n must be at least 1");
    if (!(c.side > 0.0)) bad("side must be positive");
    if (c.fractal) {
        if (c.levels < 1) bad("levels must be at least 1");
        if (c.branching < 2) bad("branching must be at least 2");
        if (!(c.scale_ratio > 0.0 && c.scale_ratio < 1.0)) bad("scale-ratio must lie in (0, 1)");
        if (c.leaf_points < 1) bad("leaf-points must be at least 1");
        if (!(c.jitter >= 0.0 && c.jitter < 1.0)) bad("jitter must lie in [0, 1)");
    }
    if (!(c.ripple.min_slope_ratio > 1.0)) bad("ripple-ratio must exceed 1");
    if (!(c.ripple.window_fraction > 0.0 && c.ripple.window_fraction < 1.0)) bad("ripple-window must lie in (0, 1)");
    if (!(c.peak.min_prominence_fraction > 0.0 && c.peak.min_prominence_fraction <= 1.0))
        bad("peak-prominence must lie in (0, 1]");
    if (c.trials < 1) bad("trials must be at least 1");
    if (c.min_series_len < 32) bad("min-series-len must be at least 32");
    if (c.radius_min.has_value() != c.radius_max.has_value()) bad("radius-min and radius-max go together");
    if (c.radius_min && !(*c.radius_min > 0.0 && *c.radius_max >= *c.radius_min))
        bad("radius range must satisfy 0 < radius-min <= radius-max");
    if (c.chi_grid < 100) bad("chi-grid must be at least 100");
    if (!(c.parsimony_tolerance >= 0.0)) bad("parsimony must be non-negative");
    if (c.out_dir.empty()) bad("out-dir must not be empty");
}

struct InputStats {
    std::size_t rows = 0, malformed = 0, filtered = 0, merged = 0;
};

inline PointSet load_points(const RunConfig& c, InputStats& stats) {
    PointSet s;
    if (c.points_file) {
        std::ifstream in(*c.points_file);
        if (!in) fail(Category::IoError, "cannot open " + *c.points_file);
        s = read_points_csv(in);
    } else if (c.opencellid_file) {
        std::ifstream in(*c.opencellid_file);
        if (!in) fail(Category::IoError, "cannot open " + *c.opencellid_file);
        auto parsed = parse_opencellid_csv(in, c.mcc);
        stats.rows = parsed.rows;
        stats.malformed = parsed.malformed;
        stats.filtered = parsed.filtered;
        std::string tag = "opencellid:" + std::filesystem::path(*c.opencellid_file).filename().string();
        if (c.mcc) tag += ";mcc=" + std::to_string(*c.mcc);
        auto proj = project(parsed.records, c.dedup_epsilon_km, tag);
        stats.merged = proj.merged;
        s = std::move(proj.set);
    } else if (c.uniform) {
        s = gen_uniform(c.n, c.side, c.seed);
    } else if (c.fractal) {
        s = gen_fractal(c.levels, c.branching, c.scale_ratio, c.leaf_points, c.side, c.jitter, c.seed);
    } else {
        fail(Category::InvalidConfig, "no input source");
    }
    if (s.points.size() > c.max_points && !c.allow_large)
        fail(Category::LargeInput, std::to_string(s.points.size()) + " points exceed the cap of " +
                                       std::to_string(c.max_points) + "; pass --allow-large to proceed");
    return s;
}

class Stopwatch {
public:
    template <class F>
    auto time(const std::string& name, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
            f();
            record(name, t0);
        } else {
            auto r = f();
            record(name, t0);
            return r;
        }
    }
    Json json() const {
        Json j = Json::object();
        for (const auto& [k, v] : laps_) j[k] = v;
        return j;
    }

private:
    std::vector<std::pair<std::string, double>> laps_;
    void record(const std::string& name, std::chrono::steady_clock::time_point t0) {
        laps_.emplace_back(name, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
};

// ---------------------------------------------------------------- JSON views

inline Json to_json(const HurstEstimate& e) {
    Json pts = Json::array();
    for (const auto& p : e.points) pts.push_back({{"n", p.n}, {"rs", p.rs}});
    return {{"h", e.h}, {"c", e.c}, {"r_squared", e.r_squared}, {"points", pts}};
}

inline Json to_json(const HurstTrials& t) {
    Json est = Json::array();
    for (const auto& e : t.estimates) est.push_back(to_json(e));
    return {{"mean_h", t.mean_h},
            {"trials", t.estimates.size()},
            {"attempts", t.attempts},
            {"radius_range", {t.radius_lo, t.radius_hi}},
            {"estimates", est}};
}

inline Json to_json(const FitReport& r, std::size_t dropped_before) {
    Json cands = Json::array();
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
        const auto& c = r.candidates[i];
        Json params = Json::object();
        for (const auto& p : c.params) params[p.name] = p.value;
        Json row = {{"family", family_name(c.family)}, {"params", params}};
        row["rmse"] = std::isfinite(c.rmse) ? Json(c.rmse) : Json(nullptr);
        row["rank"] = i + 1;
        if (!c.ok()) row["error"] = c.error;
        cands.push_back(row);
    }
    return {{"candidates", cands},
            {"dropped_nonpositive", r.dropped_nonpositive + dropped_before},
            {"sample_count", r.sample_count},
            {"bin_width", r.pdf.bin_width},
            {"bins", r.pdf.bin_centers.size()}};
}

inline Json parameters_json(const RunConfig& c) {
    Json input;
    if (c.points_file) input = {{"kind", "points"}, {"path", *c.points_file}};
    if (c.opencellid_file) {
        input = {{"kind", "opencellid"}, {"path", *c.opencellid_file}, {"dedup_eps_km", c.dedup_epsilon_km}};
        input["mcc"] = c.mcc ? Json(*c.mcc) : Json(nullptr);
    }
    if (c.uniform) input = {{"kind", "uniform"}, {"n", c.n}, {"side", c.side}};
    if (c.fractal)
        input = {{"kind", "fractal"},     {"levels", c.levels},         {"branching", c.branching},
                 {"scale_ratio", c.scale_ratio}, {"leaf_points", c.leaf_points}, {"side", c.side},
                 {"jitter", c.jitter}};
    Json hurst = {{"trials", c.trials}, {"min_series_len", c.min_series_len}};
    hurst["radius_range"] = c.radius_min ? Json({*c.radius_min, *c.radius_max}) : Json("default");
    return {{"input", input},
            {"seed", c.seed},
            {"ripple", {{"min_slope_ratio", c.ripple.min_slope_ratio}, {"window_fraction", c.ripple.window_fraction}}},
            {"peak", {{"min_prominence_fraction", c.peak.min_prominence_fraction}}},
            {"hurst", hurst},
            {"fit", {{"chi_grid", c.chi_grid}, {"parsimony_tolerance", c.parsimony_tolerance}}}};
}

// ---------------------------------------------------------------- stages

struct Topology {
    Triangulation tri;
    Filtration filtration;
    BettiCurve betti;
    EulerCurve euler;
};

inline Topology compute_topology(const PointSet& s, Stopwatch& sw) {
    Topology t;
    t.tri = sw.time("delaunay", [&] { return delaunay(s.points); });
    t.filtration = sw.time("alpha_values", [&] { return alpha_values(t.tri); });
    t.betti = sw.time("betti_curves", [&] { return betti_curves(t.filtration); });
    t.euler = euler_curve(t.betti);
    return t;
}

// With `tolerant`, an ordering that runs out of usable trials is reported in
// the JSON instead of aborting the run.
inline Json hurst_section(const PointSet& s, const RunConfig& c, bool tolerant) {
    HurstTrialOptions opt;
    opt.trials = c.trials;
    opt.min_series_len = c.min_series_len;
    opt.seed = derive_seed(c.seed, 0x68757273);
    if (c.radius_min) opt.radius_range = std::pair{*c.radius_min, *c.radius_max};
    Json j = {{"seed", c.seed}};
    for (auto [key, order] : {std::pair{"ascending", SeriesOrder::Ascending}, {"record", SeriesOrder::Record}}) {
        opt.order = order;
        try {
            j[key] = to_json(hurst_trials(s.points, opt));
        } catch (const Error& e) {
            if (!tolerant || e.category() != Category::InsufficientData) throw;
            j[key] = {{"mean_h", nullptr}, {"error", e.name()}, {"message", e.what()}};
        }
    }
    return j;
}

inline Json fit_section(const EulerCurve& e, const RunConfig& c) {
    const auto chi = chi_samples(e, c.chi_grid);
    RankOptions opt;
    opt.parsimony_tolerance = c.parsimony_tolerance;
    return to_json(rank_candidates(chi.values, opt), chi.dropped_nonpositive);
}

inline void write_text(const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    if (!out) fail(Category::IoError, "cannot write " + p.string());
    out << body;
    if (!out) fail(Category::IoError, "write failed for " + p.string());
}

inline void write_json(const std::filesystem::path& p, const Json& j) { write_text(p, j.dump(2) + "\n"); }

inline std::filesystem::path prepare_out_dir(const RunConfig& c) {
    std::error_code ec;
    std::filesystem::create_directories(c.out_dir, ec);
    if (ec) fail(Category::IoError, "cannot create " + c.out_dir + ": " + ec.message());
    return c.out_dir;
}

inline Json summary_json(const PointSet& s, const InputStats& st, const Topology& t, const RunConfig& c) {
    const auto& b = t.betti;
    std::int64_t beta1_max = 0;
    for (auto v : b.beta1) beta1_max = std::max(beta1_max, v);
    Json j = {{"source", s.source},
              {"points", s.points.size()},
              {"origin", {s.lat0, s.lon0}},
              {"input", {{"rows", st.rows}, {"malformed", st.malformed}, {"filtered", st.filtered}, {"merged", st.merged}}},
              {"triangulation",
               {{"vertices", t.tri.vertices.size()}, {"edges", t.tri.edges.size()}, {"triangles", t.tri.triangles.size()}}},
              {"critical_alphas", b.size()},
              {"alpha_max", t.filtration.alpha_max},
              {"beta0_initial", b.beta0.front()},
              {"beta0_final", b.beta0.back()},
              {"beta1_final", b.beta1.back()},
              {"beta1_max", beta1_max},
              {"chi_final", t.euler.chi.back()}};
    j["parameters"] = parameters_json(c);
    return j;
}

// Full pipeline; writes curves.csv, features.csv, hurst.json, fit.json and
// summary.json according to the enabled analyses.
struct RunOutputs {
    std::vector<std::string> files;
    Json summary;
};

inline RunOutputs run_analysis(const RunConfig& c, bool curves, bool detect, bool hurst, bool fit,
                               bool tolerant = false) {
    validate(c);
    Stopwatch sw;
    InputStats stats;
    const PointSet s = sw.time("load", [&] { return load_points(c, stats); });
    std::optional<Topology> topo;
    if (curves || detect || fit) topo = compute_topology(s, sw);

    RunOutputs out;
    std::vector<std::pair<std::string, std::string>> texts;
    std::vector<std::pair<std::string, Json>> jsons;
    if (topo) out.summary = summary_json(s, stats, *topo, c);
    else out.summary = {{"source", s.source}, {"points", s.points.size()}, {"parameters", parameters_json(c)}};

    if (curves) {
        std::ostringstream csv;
        write_curves_csv(csv, topo->betti);
        texts.emplace_back("curves.csv", csv.str());
    }
    if (detect) {
        const auto ripples = sw.time("detect_ripples", [&] { return detect_ripples(topo->betti, c.ripple); });
        const auto peaks = sw.time("detect_peaks", [&] { return detect_peaks(topo->betti, c.peak); });
        std::ostringstream csv;
        write_features_csv(csv, ripples, peaks);
        texts.emplace_back("features.csv", csv.str());
        out.summary["ripples"] = ripples.size();
        out.summary["peaks"] = peaks.size();
    }
    if (hurst) {
        Json h = sw.time("hurst", [&] { return hurst_section(s, c, tolerant); });
        out.summary["hurst"] = {{"mean_h_ascending", h["ascending"]["mean_h"]},
                                {"mean_h_record", h["record"]["mean_h"]}};
        jsons.emplace_back("hurst.json", std::move(h));
    }
    if (fit) {
        Json f = sw.time("fit", [&] { return fit_section(topo->euler, c); });
        out.summary["fit"] = {{"best", f["candidates"][0]["family"]}, {"sample_count", f["sample_count"]}};
        jsons.emplace_back("fit.json", std::move(f));
    }
    out.summary["timings_ms"] = sw.json();

    const auto dir = prepare_out_dir(c);
    for (const auto& [name, body] : texts) {
        write_text(dir / name, body);
        out.files.push_back(name);
    }
    for (const auto& [name, j] : jsons) {
        write_json(dir / name, j);
        out.files.push_back(name);
    }
    if (curves || detect) {
        write_json(dir / "summary.json", out.summary);
        out.files.push_back("summary.json");
    }
    return out;
}

inline RunOutputs run(const RunConfig& c) { return run_analysis(c, true, c.detect, c.hurst, c.fit, true); }

inline std::string generate(const RunConfig& c, const std::optional<std::string>& output) {
    validate(c);
    if (!c.uniform && !c.fractal) fail(Category::InvalidConfig, "generate needs --uniform or --fractal");
    InputStats stats;
    const auto s = load_points(c, stats);
    std::ostringstream csv;
    write_points_csv(csv, s);
    std::filesystem::path path;
    if (output) {
        path = *output;
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    } else {
        path = prepare_out_dir(c) / "points.csv";
    }
    write_text(path, csv.str());
    return path.string();
}

// Merges the artifacts of a previous run into report.json.
inline Json report(const std::string& dir) {
    const std::filesystem::path d(dir);
    const std::vector<std::string> names{"summary.json", "curves.csv", "features.csv", "hurst.json", "fit.json"};
    std::string missing;
    for (const auto& n : names)
        if (!std::filesystem::is_regular_file(d / n)) missing += (missing.empty() ? "" : ",") + n;
    if (!missing.empty()) fail(Category::MissingArtifact, "missing in " + dir + ": " + missing);

    auto read = [&](const std::string& n) {
        std::ifstream in(d / n, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    auto parse = [&](const std::string& n) {
        try {
            return Json::parse(read(n));
        } catch (const Json::parse_error& e) {
            fail(Category::MalformedInput, n + ": " + e.what());
        }
    };
    auto csv_rows = [&](const std::string& n, const std::string& header) {
        std::istringstream in(read(n));
        std::string line;
        if (!std::getline(in, line) || line != header)
            fail(Category::MalformedInput, n + ": expected header " + header);
        std::vector<std::vector<std::string>> rows;
        while (std::getline(in, line))
            if (!line.empty()) rows.push_back(split_csv_line(line));
        return rows;
    };

    Json r;
    r["summary"] = parse("summary.json");
    const auto curve = csv_rows("curves.csv", "alpha,beta0,beta1,chi");
    r["curves"] = {{"rows", curve.size()}};
    Json feats = Json::array();
    for (const auto& row : csv_rows("features.csv", "kind,alpha,value,extra")) {
        if (row.size() != 4) fail(Category::MalformedInput, "features.csv: expected 4 fields");
        const auto a = parse_number<double>(row[1]);
        const auto v = parse_number<double>(row[2]);
        if (!a || !v) fail(Category::MalformedInput, "features.csv: bad number");
        feats.push_back({{"kind", row[0]}, {"alpha", *a}, {"value", *v}, {"extra", row[3]}});
    }
    r["features"] = feats;
    r["hurst"] = parse("hurst.json");
    r["fit"] = parse("fit.json");
    return r;
}

} // namespace celltopo
