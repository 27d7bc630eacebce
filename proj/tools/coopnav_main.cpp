#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coopnav/magmap.hpp"
#include "coopnav/montecarlo.hpp"
#include "coopnav/trial.hpp"

namespace fs = std::filesystem;
using namespace coopnav;

namespace {

std::string sanitize(std::string name) {
    for (char& c : name)
        if (c == '/' || c == '\\' || c == ' ' || c == '=') c = '_';
    return name;
}

void print_summary(const MonteCarloSummary& s) {
    std::printf("case %-24s trials %-4d avg position error %.3f +/- %.3f m", s.case_name.c_str(),
                s.n_trials, s.mean_avg_position_error, s.std_avg_position_error);
    std::printf("  measured-pair %.4f m", s.mean_measured_pair_error);
    if (std::isfinite(s.mean_unmeasured_pair_error))
        std::printf("  unmeasured-pair %.4f m", s.mean_unmeasured_pair_error);
    std::printf("  dead-reckoning final %.1f m", s.mean_dr_final_error);
    if (s.weight_reset_trials || s.left_map_trials || s.aborted_trials)
        std::printf("  [flags: %d weight-reset, %d left-map, %d aborted]",
                    s.weight_reset_trials, s.left_map_trials, s.aborted_trials);
    std::printf("\n");
}

void emit_case(const fs::path& out_dir, const std::string& trials_name,
               const MonteCarloSummary& summary) {
    write_trials_csv((out_dir / trials_name).string(), summary);
    write_cdf_csv((out_dir / ("cdf_" + sanitize(summary.case_name) + ".csv")).string(), summary);
    const std::vector<MonteCarloSummary> one{summary};
    write_boxplot_csv((out_dir / ("boxplot_" + sanitize(summary.case_name) + ".csv")).string(),
                      one);
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int trials,
            long long seed, int threads, bool trace) {
    TrialConfig cfg = load_trial_config(config_path);
    if (trace) {
        cfg.trace.enabled = true;
        cfg.trace.directory = (fs::path(out_dir) / "trace").string();
    }
    const int n_trials = trials > 0 ? trials : cfg.default_trials;
    const std::uint64_t master = seed >= 0 ? static_cast<std::uint64_t>(seed) : cfg.master_seed;
    const std::string case_name = fs::path(config_path).stem().string();

    fs::create_directories(out_dir);
    const MonteCarloSummary summary =
        run_monte_carlo(cfg, n_trials, master, threads, case_name);
    emit_case(out_dir, "trials.csv", summary);
    const std::vector<MonteCarloSummary> all{summary};
    write_summary_csv((fs::path(out_dir) / "summary.csv").string(), all);
    print_summary(summary);
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int trials,
              long long seed, int threads) {
    const TrialConfig base = load_trial_config(config_path);
    const auto cases = load_sweep_cases(config_path);
    if (cases.empty()) {
        std::fprintf(stderr, "config has no sweep block\n");
        return 1;
    }
    const int n_trials = trials > 0 ? trials : base.default_trials;
    const std::uint64_t master = seed >= 0 ? static_cast<std::uint64_t>(seed) : base.master_seed;

    fs::create_directories(out_dir);
    std::vector<MonteCarloSummary> summaries;
    // the unmodified config is the reference curve; every case re-uses the
    // same per-trial seeds (common random numbers)
    summaries.push_back(run_monte_carlo(base, n_trials, master, threads, "baseline"));
    emit_case(out_dir, "trials_baseline.csv", summaries.back());
    print_summary(summaries.back());
    for (const auto& c : cases) {
        const TrialConfig cfg = apply_sweep_case(base, c);
        summaries.push_back(run_monte_carlo(cfg, n_trials, master, threads, c.name));
        emit_case(out_dir, "trials_" + sanitize(c.name) + ".csv", summaries.back());
        print_summary(summaries.back());
    }
    write_summary_csv((fs::path(out_dir) / "summary.csv").string(), summaries);
    write_boxplot_csv((fs::path(out_dir) / "boxplot_sweep.csv").string(), summaries);
    return 0;
}

int cmd_mapgen(const std::string& spec_path, const std::string& out_path) {
    std::ifstream in(spec_path);
    if (!in) {
        std::fprintf(stderr, "cannot open spec file: %s\n", spec_path.c_str());
        return 1;
    }
    nlohmann::json j = nlohmann::json::parse(in);
    SyntheticMapSpec spec;
    spec.seed = j.value("seed", 0ULL);
    spec.origin_east = j.value("origin_east_m", 0.0);
    spec.origin_north = j.value("origin_north_m", 0.0);
    spec.extent_east = j.value("extent_east_m", 0.0);
    spec.extent_north = j.value("extent_north_m", 0.0);
    spec.cell_size = j.value("cell_size_m", 100.0);
    spec.baseline = j.value("baseline_nt", 0.0);
    spec.bump_count = j.value("bump_count", 0);
    spec.bump_amplitude_min = j.value("bump_amplitude_min_nt", -250.0);
    spec.bump_amplitude_max = j.value("bump_amplitude_max_nt", 250.0);
    spec.bump_sigma_min = j.value("bump_sigma_min_m", 250.0);
    spec.bump_sigma_max = j.value("bump_sigma_max_m", 1500.0);
    if (spec.bump_count < 0) {
        const double density = j.value("bump_density_per_km2", 0.25);
        spec.bump_count = static_cast<int>(
            std::ceil(spec.extent_east * spec.extent_north / 1e6 * density));
    }
    const MagneticMap map = generate_synthetic(spec);
    save_grid(map, out_path);
    std::printf("wrote %dx%d grid (%.1f x %.1f km, cell %.0f m) to %s\n", map.n_cols, map.n_rows,
                (map.max_east() - map.origin_east) / 1000.0,
                (map.max_north() - map.origin_north) / 1000.0, map.cell_size, out_path.c_str());
    return 0;
}

int cmd_analyze(const std::string& in_dir) {
    std::vector<MonteCarloSummary> summaries;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        const std::string name = entry.path().filename().string();
        if (name == "trials.csv" || (name.rfind("trials_", 0) == 0 && entry.path().extension() == ".csv"))
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::fprintf(stderr, "no trials.csv found in %s\n", in_dir.c_str());
        return 1;
    }
    for (const auto& f : files) {
        MonteCarloSummary s = summarize_trials_csv(f.string());
        std::string stem = f.stem().string();
        s.case_name = stem == "trials" ? "run" : stem.substr(7);
        summaries.push_back(std::move(s));
        print_summary(summaries.back());
    }
    write_summary_csv((fs::path(in_dir) / "summary_recomputed.csv").string(), summaries);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cooperative UAV localization simulator: pairwise-ranging EKF + "
                 "magnetic-anomaly map-matching particle filter"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", spec_path, in_dir;
    int trials = 0, threads = 0;
    long long seed = -1;
    bool trace = false;

    auto* run = app.add_subcommand("run", "Run a seeded Monte Carlo batch");
    run->add_option("--config", config_path, "Trial config JSON")->required();
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--trials", trials, "Number of trials (default: config)");
    run->add_option("--seed", seed, "Master seed (default: config)");
    run->add_option("--threads", threads, "Worker threads (default: hardware)");
    run->add_flag("--trace", trace, "Dump per-step traces for the first trial");

    auto* sweep = app.add_subcommand("sweep", "Run the config's sensitivity sweep");
    sweep->add_option("--config", config_path, "Trial config JSON with a sweep block")->required();
    sweep->add_option("--out", out_dir, "Output directory");
    sweep->add_option("--trials", trials, "Number of trials per case (default: config)");
    sweep->add_option("--seed", seed, "Master seed (default: config)");
    sweep->add_option("--threads", threads, "Worker threads (default: hardware)");

    auto* mapgen = app.add_subcommand("mapgen", "Generate a synthetic anomaly grid file");
    mapgen->add_option("--spec", spec_path, "Synthetic map spec JSON")->required();
    mapgen->add_option("--out", out_dir, "Output grid file")->required();

    auto* analyze = app.add_subcommand("analyze", "Recompute summaries from emitted trial CSVs");
    analyze->add_option("--in", in_dir, "Directory holding trials*.csv")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, trials, seed, threads, trace);
        if (sweep->parsed()) return cmd_sweep(config_path, out_dir, trials, seed, threads);
        if (mapgen->parsed()) return cmd_mapgen(spec_path, out_dir);
        if (analyze->parsed()) return cmd_analyze(in_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
