#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "coopnav/comm.hpp"
#include "coopnav/montecarlo.hpp"
#include "coopnav/trial.hpp"

using namespace coopnav;

namespace {

TrialConfig desk_config(int n, double duration, int particles) {
    TrialConfig cfg;
    cfg.group_size = n;
    cfg.duration = duration;
    cfg.noise.sigma_r = 1.0;
    cfg.noise.sigma_m = 10.0;
    cfg.noise.sigma_v = 0.3;
    cfg.noise.sigma_g = deg_to_rad(0.005);
    cfg.resolve_bias_stds();
    cfg.init.estimate_heading_std = deg_to_rad(1.0);
    cfg.init.gamma_init_std = deg_to_rad(1.0);
    cfg.pf.particle_count = particles;
    SyntheticMapSpec spec;
    spec.seed = 424242;
    spec.cell_size = 100.0;
    // one fixed map for every group size (covers N <= 8 flying <= 10 min)
    spec.origin_east = -10000.0;
    spec.origin_north = -10000.0;
    spec.extent_east = 56000.0;
    spec.extent_north = 27000.0;
    spec.bump_amplitude_min = -250.0;
    spec.bump_amplitude_max = 250.0;
    spec.bump_sigma_min = 250.0;
    spec.bump_sigma_max = 4000.0;
    spec.bump_count = -1; // density-resolved at build_map
    cfg.map.synthetic = spec;
    cfg.map.bump_density_per_km2 = 0.15;
    return cfg;
}

TrialConfig zero_noise_config(int n, double duration, int particles) {
    TrialConfig cfg = desk_config(n, duration, particles);
    cfg.noise = NoiseConfig{0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    cfg.init.true_position_jitter = 1.0;
    cfg.init.estimate_position_std = 0.0;
    cfg.init.estimate_heading_std = 0.0;
    cfg.init.gamma_init_std = 0.0;
    cfg.pf.position_noise_std = 0.0;
    cfg.pf.heading_noise_std = 0.0;
    cfg.pf.gamma_noise_std = 0.0;
    return cfg;
}

bool equal_series(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

} // namespace

TEST_CASE("partition_pairs: N=4 has no never-measured pairs") {
    const auto part = partition_pairs(4);
    CHECK(part.unmeasured.empty());
    CHECK(part.measured.size() == 6);
    const auto part3 = partition_pairs(3);
    CHECK(part3.unmeasured.empty());
    CHECK(part3.measured.size() == 3);
}

TEST_CASE("partition_pairs: N=7 splits into the schedule union and its complement") {
    using P = std::vector<std::pair<int, int>>;
    // E0 = {01,23,45}, E1 = {12,34,56}, E2 = {04,15,26} per the odd-group rule
    const P expected_measured{{0, 1}, {0, 4}, {1, 2}, {1, 5}, {2, 3},
                              {2, 6}, {3, 4}, {4, 5}, {5, 6}};
    const auto part = partition_pairs(7);
    CHECK(part.measured == expected_measured);
    CHECK(part.unmeasured.size() == 21 - 9);
    for (const auto& e : expected_measured) {
        const bool in_unmeasured =
            std::find(part.unmeasured.begin(), part.unmeasured.end(), e) != part.unmeasured.end();
        CHECK_FALSE(in_unmeasured);
    }
}

TEST_CASE("compute_distance_errors: perfect estimates give zero error") {
    std::vector<std::vector<Pose2D>> truth(5);
    for (int k = 0; k < 5; ++k)
        truth[k] = {Pose2D{0.0 + k, 0, 0}, Pose2D{100.0 + k, 0, 0}, Pose2D{0.0 + k, 100, 0},
                    Pose2D{100.0 + k, 100, 0}, Pose2D{50.0 + k, 50, 0}, Pose2D{10.0 + k, 80, 0},
                    Pose2D{90.0 + k, 20, 0}};
    const auto [measured, unmeasured] = compute_distance_errors(truth, truth, 7);
    CHECK(measured == doctest::Approx(0.0));
    CHECK(unmeasured == doctest::Approx(0.0));
}

TEST_CASE("compute_position_errors: zero error, constant offset, linear bias drift") {
    const double ts = 0.2;
    std::vector<Pose2D> truth, shifted;
    for (int k = 0; k <= 100; ++k) {
        truth.push_back(Pose2D{k * 10.0, 0, 0});
        shifted.push_back(Pose2D{k * 10.0 + 3.0, 0, 0});
    }
    const auto exact = compute_position_errors(truth, truth, truth, ts, 0.0);
    CHECK(exact.avg_estimate_error == doctest::Approx(0.0));
    const auto offset = compute_position_errors(truth, shifted, truth, ts, 0.0);
    CHECK(offset.avg_estimate_error == doctest::Approx(3.0));

    // dead reckoning with a pure velocity bias grows linearly:
    // error(2T) / error(T) = 2
    const double v = 50.0, bias = 0.1;
    std::vector<Pose2D> dr_truth, dr;
    Pose2D t{}, d{};
    dr_truth.push_back(t);
    dr.push_back(d);
    const int steps = 1000;
    for (int k = 0; k < steps; ++k) {
        t = step_pose(t, ControlMeasurement{v, 0.0}, ts);
        d = step_pose(d, ControlMeasurement{v + bias, 0.0}, ts);
        dr_truth.push_back(t);
        dr.push_back(d);
    }
    const auto drift = compute_position_errors(dr_truth, dr_truth, dr, ts, 0.0);
    const double err_half = drift.dr_error_series[steps / 2];
    const double err_full = drift.dr_error_series[steps];
    CHECK(err_full / err_half > 1.9);
    CHECK(err_full / err_half < 2.1);
}

TEST_CASE("mean_and_std and boxplot_stats") {
    const std::vector<double> one{4.2};
    const auto [m1, s1] = mean_and_std(one);
    CHECK(m1 == doctest::Approx(4.2));
    CHECK(s1 == 0.0);

    const std::vector<double> vals{1.0, 2.0, 3.0, 4.0};
    const auto [m, s] = mean_and_std(vals);
    CHECK(m == doctest::Approx(2.5));
    CHECK(s == doctest::Approx(std::sqrt(5.0 / 3.0)));

    const auto box = boxplot_stats({5.0, 1.0, 3.0, 2.0, 4.0});
    CHECK(box[0] == 1.0);
    CHECK(box[1] == doctest::Approx(2.0));
    CHECK(box[2] == doctest::Approx(3.0));
    CHECK(box[3] == doctest::Approx(4.0));
    CHECK(box[4] == 5.0);
}

TEST_CASE("run_trial: same config and seed reproduce bit-identical results") {
    const TrialConfig cfg = desk_config(2, 60.0, 150);
    const MagneticMap map = build_map(cfg);
    const TrialResult a = run_trial(cfg, 91, map);
    const TrialResult b = run_trial(cfg, 91, map);
    CHECK(a.avg_position_error == b.avg_position_error);
    CHECK(a.dr_final_error == b.dr_final_error);
    CHECK(a.avg_measured_pair_error == b.avg_measured_pair_error);
    CHECK(equal_series(a.pf_error_series, b.pf_error_series));
    CHECK(equal_series(a.dr_error_series, b.dr_error_series));
    CHECK(equal_series(a.measured_error_series, b.measured_error_series));

    const TrialResult c = run_trial(cfg, 92, map);
    CHECK_FALSE(equal_series(a.pf_error_series, c.pf_error_series));
}

TEST_CASE("run_trial: zero sensor noise tracks truth to well under half a meter") {
    const TrialConfig cfg = zero_noise_config(4, 120.0, 50);
    const TrialResult r = run_trial(cfg, 7);
    CHECK_FALSE(r.aborted);
    CHECK(r.avg_position_error < 0.5);
    CHECK(r.avg_measured_pair_error < 0.1);
}

TEST_CASE("run_trial: odd group sizes run the reduced schedule end to end") {
    const TrialConfig cfg = desk_config(5, 90.0, 100);
    const TrialResult r = run_trial(cfg, 17);
    CHECK_FALSE(r.aborted);
    CHECK(r.incomplete_packet_events == 0);
    CHECK(r.weight_reset_events == 0);
    CHECK(r.avg_position_error < 50.0);
    CHECK(r.avg_measured_pair_error < 2.0);
    // N=5 has never-measured pairs: 6 of 10 pairs are covered by the
    // reduced edge sets
    CHECK(std::isfinite(r.avg_unmeasured_pair_error));
    CHECK(partition_pairs(5).measured.size() == 6);
    CHECK(partition_pairs(5).unmeasured.size() == 4);
}

TEST_CASE("run_trial: trajectories that leave the map abort with a flag") {
    TrialConfig cfg = desk_config(2, 120.0, 50);
    SyntheticMapSpec tiny;
    tiny.seed = 1;
    tiny.cell_size = 50.0;
    tiny.extent_east = 500.0; // the 50 m/s eastward flight exits in ~10 s
    tiny.extent_north = 2000.0;
    tiny.origin_east = -100.0;
    tiny.origin_north = -500.0;
    tiny.bump_count = 0;
    cfg.map.synthetic = tiny;
    const TrialResult r = run_trial(cfg, 3);
    CHECK(r.left_map);
    CHECK(r.aborted);
    CHECK(r.pf_error_series.size() < 200);
}

TEST_CASE("monte carlo: aggregation matches an independent re-read of trials.csv") {
    const TrialConfig cfg = desk_config(3, 60.0, 100);
    const auto summary = run_monte_carlo(cfg, 4, 1234, 1, "oracle");
    const auto dir = std::filesystem::temp_directory_path() / "coopnav_mc";
    std::filesystem::create_directories(dir);
    const auto csv = (dir / "trials.csv").string();
    write_trials_csv(csv, summary);

    const auto reread = summarize_trials_csv(csv);
    CHECK(reread.n_trials == summary.n_trials);
    CHECK(std::abs(reread.mean_avg_position_error - summary.mean_avg_position_error) <= 1e-12);
    CHECK(std::abs(reread.std_avg_position_error - summary.std_avg_position_error) <= 1e-12);
    CHECK(std::abs(reread.mean_dr_final_error - summary.mean_dr_final_error) <= 1e-12);
    CHECK(std::abs(reread.mean_measured_pair_error - summary.mean_measured_pair_error) <= 1e-12);

    // single-trial batch: mean equals the trial, std is zero
    const auto single = run_monte_carlo(cfg, 1, 99, 1, "single");
    CHECK(single.mean_avg_position_error ==
          doctest::Approx(single.trials[0].avg_position_error));
    CHECK(single.std_avg_position_error == 0.0);

    // CDF is non-decreasing from >0 to 1
    const auto cdf_path = (dir / "cdf.csv").string();
    write_cdf_csv(cdf_path, summary);
    std::ifstream in(cdf_path);
    std::string line;
    std::getline(in, line); // header
    double prev_err = -1e300, prev_p = 0.0, p = 0.0;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        const double err = std::stod(line.substr(0, comma));
        p = std::stod(line.substr(comma + 1));
        CHECK(err >= prev_err);
        CHECK(p > prev_p);
        prev_err = err;
        prev_p = p;
    }
    CHECK(p == doctest::Approx(1.0));
    std::filesystem::remove_all(dir);
}

TEST_CASE("config: JSON template loads, sweeps apply, validation rejects nonsense") {
    const auto dir = std::filesystem::temp_directory_path() / "coopnav_cfg";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "cfg.json").string();
    {
        std::ofstream out(path);
        out << R"({
  "group_size": 8,
  "duration_s": 300.0,
  "master_seed": 77,
  "trials": 5,
  "noise": {"sigma_r_m": 1.0, "sigma_m_nt": 10.0, "sigma_v_mps": 0.3, "sigma_g_degps": 0.005},
  "pf": {"particle_count": 500},
  "map": {"synthetic": {"seed": 9, "cell_size_m": 100.0}},
  "sweep": [{"field": "sigma_v_mps", "value": 1.0}]
})";
    }
    const TrialConfig cfg = load_trial_config(path);
    CHECK(cfg.group_size == 8);
    CHECK(cfg.duration == 300.0);
    CHECK(cfg.noise.sigma_g == doctest::Approx(deg_to_rad(0.005)));
    CHECK(cfg.noise.bias_v_std == doctest::Approx(0.03));
    CHECK(cfg.pf.particle_count == 500);
    CHECK(cfg.master_seed == 77);

    const auto sweeps = load_sweep_cases(path);
    REQUIRE(sweeps.size() == 1);
    const TrialConfig swept = apply_sweep_case(cfg, sweeps[0]);
    CHECK(swept.noise.sigma_v == 1.0);
    CHECK(swept.noise.bias_v_std == doctest::Approx(0.1));

    TrialConfig bad = cfg;
    bad.group_size = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidSpecError);
    TrialConfig no_map = cfg;
    no_map.map.synthetic.reset();
    CHECK_THROWS_AS(no_map.validate(), InvalidSpecError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("build_map: auto-sized synthetic extent covers the flight corridor") {
    const TrialConfig cfg = desk_config(4, 300.0, 100);
    const MagneticMap map = build_map(cfg);
    // corridor: east 0..duration*vmax, north 0..(N-1)*spacing, 10 km margin
    CHECK(map.origin_east <= -9999.0);
    CHECK(map.max_east() >= 300.0 * 60.0 + 9999.0);
    CHECK(map.origin_north <= -9999.0);
    CHECK(map.max_north() >= 3000.0 + 9999.0);
    CHECK(map.contains(0.0, 0.0));
}
