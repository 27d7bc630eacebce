#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coopnav/trial.hpp"

namespace coopnav {

/// The never-measured / ever-measured pair split induced by the three edge
/// sets (union over the schedule) for a given group size.
struct PairPartition {
    std::vector<std::pair<int, int>> measured;
    std::vector<std::pair<int, int>> unmeasured;
};

PairPartition partition_pairs(int n_uavs);

/// Streaming |estimated - true| inter-vehicle distance errors, split by the
/// pair partition.
class DistanceErrorAccumulator {
public:
    explicit DistanceErrorAccumulator(int n_uavs);

    void add_step(std::span<const Pose2D> truth, std::span<const Pose2D> estimate);

    const std::vector<double>& measured_series() const { return measured_series_; }
    const std::vector<double>& unmeasured_series() const { return unmeasured_series_; }

    /// Time averages; the unmeasured average is NaN when the partition has
    /// no never-measured pairs (N <= 4).
    double average_measured() const;
    double average_unmeasured() const;

private:
    PairPartition partition_;
    std::vector<double> measured_series_;
    std::vector<double> unmeasured_series_;
};

/// Offline variant over whole series (oracle-friendly).
std::pair<double, double> compute_distance_errors(
    std::span<const std::vector<Pose2D>> truth_steps,
    std::span<const std::vector<Pose2D>> estimated_steps, int n_uavs);

struct PositionErrorResult {
    std::vector<double> estimate_error_series; // m per step
    std::vector<double> dr_error_series;       // m per step
    double avg_estimate_error = 0.0;           // windowed time average
    double avg_dr_error = 0.0;
    double dr_final_error = 0.0;
};

/// Euclidean position errors of the filtered estimate and the pure
/// dead-reckoning shadow against truth. Steps are filter epochs of length
/// ts; averages cover t > window_start.
PositionErrorResult compute_position_errors(std::span<const Pose2D> truth,
                                            std::span<const Pose2D> estimate,
                                            std::span<const Pose2D> dead_reckoning, double ts,
                                            double window_start);

struct MonteCarloSummary {
    std::string case_name = "run";
    int n_trials = 0;

    double mean_avg_position_error = 0.0;
    double std_avg_position_error = 0.0;
    double mean_measured_pair_error = 0.0;
    double std_measured_pair_error = 0.0;
    double mean_unmeasured_pair_error = 0.0; // NaN when N <= 4
    double std_unmeasured_pair_error = 0.0;
    double mean_dr_final_error = 0.0;
    double std_dr_final_error = 0.0;

    int weight_reset_trials = 0;
    int left_map_trials = 0;
    int aborted_trials = 0;

    std::vector<TrialResult> trials; // ordered by trial index, series cleared
};

/// Seeded Monte Carlo batch: trial t runs with seed mix(master_seed, t);
/// aggregation is a deterministic fold ordered by trial index regardless of
/// worker scheduling.
MonteCarloSummary run_monte_carlo(const TrialConfig& cfg, int n_trials,
                                  std::uint64_t master_seed, int n_threads = 0,
                                  const std::string& case_name = "run");

/// min, q1, median, q3, max with linearly interpolated quartiles.
std::array<double, 5> boxplot_stats(std::vector<double> values);

/// Mean and sample standard deviation (std = 0 for a single value).
std::pair<double, double> mean_and_std(std::span<const double> values);

// CSV emission. All floats use 17 significant digits so outputs are
// byte-identical across runs and round-trip exactly.
void write_trials_csv(const std::string& path, const MonteCarloSummary& summary);
void write_summary_csv(const std::string& path, std::span<const MonteCarloSummary> summaries);
void write_cdf_csv(const std::string& path, const MonteCarloSummary& summary);
void write_boxplot_csv(const std::string& path, std::span<const MonteCarloSummary> summaries);

/// Re-read a trials.csv and recompute the summary statistics from it
/// (independent aggregation path used by `analyze`).
MonteCarloSummary summarize_trials_csv(const std::string& path);

} // namespace coopnav
