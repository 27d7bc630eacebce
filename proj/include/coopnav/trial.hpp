#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coopnav/geometry.hpp"
#include "coopnav/magmap.hpp"
#include "coopnav/magnetic_pf.hpp"
#include "coopnav/world.hpp"

namespace coopnav {

/// Initial condition model: true poses start on their reference tracks with
/// a small jitter; the handed-off estimates add their own uncertainty. The
/// group rotation knob coherently rotates the initial position estimates
/// about UAV 0 (useful for studying gamma convergence).
struct InitConfig {
    double true_position_jitter = 1.0;   // m
    double estimate_position_std = 1.0;  // m
    double estimate_heading_std = 0.0;   // rad
    double gamma_init_std = 0.0;         // rad
    double group_rotation_error = 0.0;   // rad
};

struct ReferenceSetup {
    double vel_amplitude = 10.0;         // m/s
    double vel_baseline = 50.0;          // m/s
    double vel_angular_frequency = 0.05; // rad/s
    double track_spacing = 1000.0;       // m
};

struct EkfTuning {
    double process_noise_inflation = 2.0;
};

/// Map source: exactly one of grid_file / synthetic. A synthetic spec with
/// zero extent is auto-sized from the flight envelope plus margin.
struct MapSourceConfig {
    std::optional<std::string> grid_file;
    std::optional<SyntheticMapSpec> synthetic;
    double bump_density_per_km2 = 0.25; // used when the spec has bump_count < 0
    double margin = 10000.0;            // m, auto-sizing margin
};

struct LowResolutionConfig {
    bool enabled = false;
    double smoothing_sigma = 400.0; // m
};

struct TraceConfig {
    bool enabled = false;
    std::string directory;
};

/// Full experiment description; a trial is a pure function of
/// (TrialConfig, seed).
struct TrialConfig {
    int group_size = 4;
    double duration = 600.0;  // s
    double filter_period = 0.2; // s (ranging + magnetometer cadence)
    int odometry_substeps = 2;  // odometry samples per filter period

    NoiseConfig noise;
    double bias_v_fraction = 0.1; // bias std as a fraction of sigma_v
    double bias_g_fraction = 0.1;
    InitConfig init;
    ReferenceSetup reference;
    ControllerConfig controller;
    EkfTuning ekf;
    PfConfig pf;
    std::optional<double> likelihood_sigma_override; // nT

    MapSourceConfig map;
    LowResolutionConfig low_resolution;
    TraceConfig trace;

    std::uint64_t master_seed = 0;
    int default_trials = 100;

    bool monitor_covariance = false; // track covariance symmetry/eigenvalues

    void validate() const; // throws InvalidSpecError

    /// Re-derive the turn-on bias stds from the fractions (call after
    /// overriding a sigma).
    void resolve_bias_stds() {
        noise.bias_v_std = bias_v_fraction * noise.sigma_v;
        noise.bias_g_std = bias_g_fraction * noise.sigma_g;
    }

    double likelihood_sigma() const;
    double max_reference_velocity() const {
        return reference.vel_baseline + reference.vel_amplitude;
    }
};

/// Noise override applied on top of the base config; one sweep case spawns
/// one Monte Carlo batch.
struct SweepCase {
    std::string name;
    std::string field; // one of the noise.* keys
    double value = 0.0;
};

TrialConfig load_trial_config(const std::string& path);
TrialConfig parse_trial_config(const std::string& json_text);
std::vector<SweepCase> load_sweep_cases(const std::string& path);
TrialConfig apply_sweep_case(TrialConfig cfg, const SweepCase& c);

/// Build the map a config describes (generate or load, then optionally
/// degrade). Shared by every trial of a batch.
MagneticMap build_map(const TrialConfig& cfg);

/// Per-trial outcome: error time series for the reported UAV (UAV 0), EKF
/// pair-distance error series, summary metrics, and quality flags.
struct TrialResult {
    std::uint64_t seed = 0;

    std::vector<double> pf_error_series;       // m, per filter step, UAV 0
    std::vector<double> dr_error_series;       // m, per filter step, UAV 0
    std::vector<double> measured_error_series; // m, per EKF step
    std::vector<double> unmeasured_error_series;

    double avg_position_error = 0.0;        // m, time-averaged (post 60 s window)
    double avg_measured_pair_error = 0.0;   // m
    double avg_unmeasured_pair_error = 0.0; // m, NaN when no never-measured pairs
    double dr_final_error = 0.0;            // m

    double final_gamma_estimate = 0.0; // rad, PF gamma of UAV 0 at the last step
    double final_gamma_true = 0.0;     // rad, Procrustes fit of EKF shape vs truth

    int weight_reset_events = 0;
    int incomplete_packet_events = 0;
    bool left_map = false;
    bool aborted = false;

    // Filled only when monitor_covariance is set.
    double min_covariance_eigenvalue = 0.0;
    double max_covariance_asymmetry = 0.0;
};

TrialResult run_trial(const TrialConfig& cfg, std::uint64_t seed, const MagneticMap& map);
TrialResult run_trial(const TrialConfig& cfg, std::uint64_t seed);

/// Time-average window used for avg_position_error: steps after the first
/// 60 s when the trial is longer than 120 s, otherwise every step.
double error_window_start(double duration);

} // namespace coopnav
