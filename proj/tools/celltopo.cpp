// celltopo: topology of planar base-station deployments from the command line.
//
//   celltopo generate --fractal --levels 3 --seed 7 --output points.csv
//   celltopo analyze  --input points.csv --out-dir out
//   celltopo run      --uniform --n 500 --out-dir out
//   celltopo report   --out-dir out
//
// Every option may also be given as `key = value` in a file passed with
// --config; flags on the command line win.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "celltopo/pipeline.hpp"

namespace {

int report_error(celltopo::Category c, const std::string& message) {
    std::string flat = message;
    for (auto& ch : flat)
        if (ch == '\n' || ch == '\r') ch = ' ';
    std::cerr << "error: category=" << celltopo::category_name(c) << " message=" << flat << '\n';
    return celltopo::exit_code(c);
}

} // namespace

int main(int argc, char** argv) {
    using namespace celltopo;
    RunConfig cfg;
    std::optional<std::string> output;
    std::optional<int> mcc;
    std::optional<std::string> input, opencellid;
    bool no_detect = false, no_hurst = false, no_fit = false;

    CLI::App app{"Alpha-complex topology, fractal signatures and Euler-characteristic fits for point deployments"};
    app.set_config("--config", "", "key = value configuration file");
    app.require_subcommand(1);

    auto* in_group = app.add_option_group("input", "exactly one input source");
    in_group->add_option("--input", input, "points CSV (x_km,y_km)");
    in_group->add_option("--opencellid", opencellid, "OpenCellID CSV");
    in_group->add_flag("--uniform", cfg.uniform, "generate uniform random points");
    in_group->add_flag("--fractal", cfg.fractal, "generate hierarchical fractal points");

    app.add_option("--mcc", mcc, "keep only this mobile country code (OpenCellID input)");
    app.add_option("--dedup-eps", cfg.dedup_epsilon_km, "deduplication distance in km")->capture_default_str();
    app.add_option("--n", cfg.n, "uniform point count")->capture_default_str();
    app.add_option("--side", cfg.side, "square side in km")->capture_default_str();
    app.add_option("--levels", cfg.levels, "fractal levels")->capture_default_str();
    app.add_option("--branching", cfg.branching, "fractal branching")->capture_default_str();
    app.add_option("--scale-ratio", cfg.scale_ratio, "fractal child/parent cell ratio")->capture_default_str();
    app.add_option("--leaf-points", cfg.leaf_points, "points per leaf cell")->capture_default_str();
    app.add_option("--jitter", cfg.jitter, "jitter as a fraction of the cell side")->capture_default_str();

    app.add_flag("--no-detect", no_detect, "skip ripple/peak detection in run");
    app.add_flag("--no-hurst", no_hurst, "skip Hurst trials in run");
    app.add_flag("--no-fit", no_fit, "skip distribution fitting in run");
    app.add_option("--ripple-ratio", cfg.ripple.min_slope_ratio, "ripple slope-ratio threshold")->capture_default_str();
    app.add_option("--ripple-window", cfg.ripple.window_fraction, "ripple window, fraction of log range")
        ->capture_default_str();
    app.add_option("--peak-prominence", cfg.peak.min_prominence_fraction, "peak prominence, fraction of max")
        ->capture_default_str();
    app.add_option("--trials", cfg.trials, "Hurst trials")->capture_default_str();
    app.add_option("--min-series-len", cfg.min_series_len, "shortest distance series used")->capture_default_str();
    app.add_option("--radius-min", cfg.radius_min, "Hurst radius lower bound (km)");
    app.add_option("--radius-max", cfg.radius_max, "Hurst radius upper bound (km)");
    app.add_option("--chi-grid", cfg.chi_grid, "alpha grid size for chi samples")->capture_default_str();
    app.add_option("--parsimony", cfg.parsimony_tolerance, "relative RMSE tolerance favouring fewer parameters")
        ->capture_default_str();

    app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    app.add_option("--out-dir,-o", cfg.out_dir, "output directory")->capture_default_str();
    app.add_option("--output", output, "points CSV path for generate");
    app.add_option("--max-points", cfg.max_points, "point cap without --allow-large")->capture_default_str();
    app.add_flag("--allow-large", cfg.allow_large, "lift the point cap");

    auto* gen_cmd = app.add_subcommand("generate", "write a synthetic points CSV");
    auto* analyze_cmd = app.add_subcommand("analyze", "curves.csv, features.csv, summary.json");
    auto* hurst_cmd = app.add_subcommand("hurst", "hurst.json");
    auto* fit_cmd = app.add_subcommand("fit", "fit.json");
    auto* report_cmd = app.add_subcommand("report", "merge a previous run's outputs into report.json");
    auto* run_cmd = app.add_subcommand("run", "full pipeline");
    for (auto* s : {gen_cmd, analyze_cmd, hurst_cmd, fit_cmd, report_cmd, run_cmd}) s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error(Category::InvalidConfig, e.what());
    }

    cfg.points_file = input;
    cfg.opencellid_file = opencellid;
    cfg.mcc = mcc;
    cfg.detect = !no_detect;
    cfg.hurst = !no_hurst;
    cfg.fit = !no_fit;

    try {
        if (*gen_cmd) {
            std::cout << generate(cfg, output) << '\n';
        } else if (*analyze_cmd) {
            run_analysis(cfg, true, true, false, false);
        } else if (*hurst_cmd) {
            run_analysis(cfg, false, false, true, false);
        } else if (*fit_cmd) {
            run_analysis(cfg, false, false, false, true);
        } else if (*report_cmd) {
            const auto r = report(cfg.out_dir);
            write_json(std::filesystem::path(cfg.out_dir) / "report.json", r);
        } else if (*run_cmd) {
            run(cfg);
        }
    } catch (const Error& e) {
        return report_error(e.category(), e.what());
    } catch (const std::bad_alloc&) {
        return report_error(Category::LargeInput, "out of memory");
    } catch (const std::exception& e) {
        return report_error(Category::IoError, e.what());
    }
    return 0;
}
