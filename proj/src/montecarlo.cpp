#include "coopnav/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "coopnav/comm.hpp"
#include "coopnav/rng.hpp"

namespace coopnav {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

PairPartition partition_pairs(int n_uavs) {
    PairPartition out;
    if (n_uavs < 2) return out;
    std::vector<std::vector<char>> ever(n_uavs, std::vector<char>(n_uavs, 0));
    for (std::int64_t phase = 0; phase < 3; ++phase)
        for (const auto& [a, b] : edge_set(n_uavs, phase)) ever[a][b] = ever[b][a] = 1;
    for (int i = 0; i < n_uavs; ++i)
        for (int j = i + 1; j < n_uavs; ++j)
            (ever[i][j] ? out.measured : out.unmeasured).emplace_back(i, j);
    return out;
}

DistanceErrorAccumulator::DistanceErrorAccumulator(int n_uavs)
    : partition_(partition_pairs(n_uavs)) {}

void DistanceErrorAccumulator::add_step(std::span<const Pose2D> truth,
                                        std::span<const Pose2D> estimate) {
    const auto mean_abs_error = [&](const std::vector<std::pair<int, int>>& pairs) {
        double sum = 0.0;
        for (const auto& [i, j] : pairs)
            sum += std::abs(planar_distance(estimate[i], estimate[j]) -
                            planar_distance(truth[i], truth[j]));
        return sum / static_cast<double>(pairs.size());
    };
    if (!partition_.measured.empty())
        measured_series_.push_back(mean_abs_error(partition_.measured));
    if (!partition_.unmeasured.empty())
        unmeasured_series_.push_back(mean_abs_error(partition_.unmeasured));
}

namespace {
double series_mean(const std::vector<double>& v) {
    if (v.empty()) return kNan;
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}
} // namespace

double DistanceErrorAccumulator::average_measured() const { return series_mean(measured_series_); }
double DistanceErrorAccumulator::average_unmeasured() const {
    return series_mean(unmeasured_series_);
}

std::pair<double, double> compute_distance_errors(
    std::span<const std::vector<Pose2D>> truth_steps,
    std::span<const std::vector<Pose2D>> estimated_steps, int n_uavs) {
    DistanceErrorAccumulator acc(n_uavs);
    const std::size_t steps = std::min(truth_steps.size(), estimated_steps.size());
    for (std::size_t t = 0; t < steps; ++t) acc.add_step(truth_steps[t], estimated_steps[t]);
    return {acc.average_measured(), acc.average_unmeasured()};
}

PositionErrorResult compute_position_errors(std::span<const Pose2D> truth,
                                            std::span<const Pose2D> estimate,
                                            std::span<const Pose2D> dead_reckoning, double ts,
                                            double window_start) {
    PositionErrorResult out;
    const std::size_t steps =
        std::min({truth.size(), estimate.size(), dead_reckoning.size()});
    double est_sum = 0.0, dr_sum = 0.0;
    std::size_t windowed = 0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double est_err = planar_distance(estimate[k], truth[k]);
        const double dr_err = planar_distance(dead_reckoning[k], truth[k]);
        out.estimate_error_series.push_back(est_err);
        out.dr_error_series.push_back(dr_err);
        if (static_cast<double>(k) * ts > window_start) {
            est_sum += est_err;
            dr_sum += dr_err;
            ++windowed;
        }
    }
    if (windowed == 0 && steps > 0) { // short series: average everything
        for (std::size_t k = 0; k < steps; ++k) {
            est_sum += out.estimate_error_series[k];
            dr_sum += out.dr_error_series[k];
        }
        windowed = steps;
    }
    out.avg_estimate_error = windowed ? est_sum / static_cast<double>(windowed) : kNan;
    out.avg_dr_error = windowed ? dr_sum / static_cast<double>(windowed) : kNan;
    out.dr_final_error = steps ? out.dr_error_series.back() : kNan;
    return out;
}

std::pair<double, double> mean_and_std(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) return {kNan, kNan};
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(n);
    if (n == 1) return {mean, 0.0};
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    return {mean, std::sqrt(sq / static_cast<double>(n - 1))};
}

std::array<double, 5> boxplot_stats(std::vector<double> values) {
    if (values.empty()) return {kNan, kNan, kNan, kNan, kNan};
    std::sort(values.begin(), values.end());
    const auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        if (lo + 1 >= values.size()) return values.back();
        return values[lo] + frac * (values[lo + 1] - values[lo]);
    };
    return {values.front(), quantile(0.25), quantile(0.5), quantile(0.75), values.back()};
}

namespace {

// Deterministic fold over trials ordered by index; shared by the in-memory
// aggregation and the trials.csv re-aggregation so the two match exactly.
void aggregate(MonteCarloSummary& summary) {
    std::vector<double> pos, measured, unmeasured, dr;
    summary.weight_reset_trials = 0;
    summary.left_map_trials = 0;
    summary.aborted_trials = 0;
    for (const auto& t : summary.trials) {
        pos.push_back(t.avg_position_error);
        measured.push_back(t.avg_measured_pair_error);
        unmeasured.push_back(t.avg_unmeasured_pair_error);
        dr.push_back(t.dr_final_error);
        if (t.weight_reset_events > 0) ++summary.weight_reset_trials;
        if (t.left_map) ++summary.left_map_trials;
        if (t.aborted) ++summary.aborted_trials;
    }
    std::tie(summary.mean_avg_position_error, summary.std_avg_position_error) =
        mean_and_std(pos);
    std::tie(summary.mean_measured_pair_error, summary.std_measured_pair_error) =
        mean_and_std(measured);
    std::tie(summary.mean_unmeasured_pair_error, summary.std_unmeasured_pair_error) =
        mean_and_std(unmeasured);
    std::tie(summary.mean_dr_final_error, summary.std_dr_final_error) = mean_and_std(dr);
    summary.n_trials = static_cast<int>(summary.trials.size());
}

} // namespace

MonteCarloSummary run_monte_carlo(const TrialConfig& cfg, int n_trials,
                                  std::uint64_t master_seed, int n_threads,
                                  const std::string& case_name) {
    if (n_trials < 1) throw InvalidSpecError("n_trials must be >= 1");
    cfg.validate();
    const MagneticMap map = build_map(cfg);

    MonteCarloSummary summary;
    summary.case_name = case_name;
    summary.trials.resize(n_trials);

    const auto run_one = [&](int t) {
        TrialConfig trial_cfg = cfg;
        trial_cfg.trace.enabled = cfg.trace.enabled && t == 0; // trace the first trial only
        TrialResult r = run_trial(trial_cfg, mix_seed(master_seed, static_cast<std::uint64_t>(t)), map);
        // series are per-trial diagnostics; the batch keeps summaries only
        r.pf_error_series.clear();
        r.pf_error_series.shrink_to_fit();
        r.dr_error_series.clear();
        r.dr_error_series.shrink_to_fit();
        r.measured_error_series.clear();
        r.measured_error_series.shrink_to_fit();
        r.unmeasured_error_series.clear();
        r.unmeasured_error_series.shrink_to_fit();
        summary.trials[t] = std::move(r);
    };

    if (n_threads <= 0) n_threads = static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min(n_threads, n_trials));
    if (n_threads == 1) {
        for (int t = 0; t < n_trials; ++t) run_one(t);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> workers;
        workers.reserve(n_threads);
        for (int w = 0; w < n_threads; ++w) {
            workers.emplace_back([&]() {
                for (int t = next.fetch_add(1); t < n_trials; t = next.fetch_add(1)) run_one(t);
            });
        }
        for (auto& w : workers) w.join();
    }

    aggregate(summary);
    return summary;
}

namespace {

std::FILE* open_or_throw(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ParseError("cannot open output file: " + path);
    return f;
}

} // namespace

void write_trials_csv(const std::string& path, const MonteCarloSummary& summary) {
    std::FILE* f = open_or_throw(path);
    std::fprintf(f, "trial,seed,avg_position_error_m,avg_measured_pair_error_m,"
                    "avg_unmeasured_pair_error_m,dr_final_error_m,final_gamma_estimate_rad,"
                    "final_gamma_true_rad,weight_reset_events,incomplete_packet_events,"
                    "left_map,aborted\n");
    for (std::size_t t = 0; t < summary.trials.size(); ++t) {
        const auto& r = summary.trials[t];
        std::fprintf(f, "%zu,%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%d,%d\n", t,
                     static_cast<unsigned long long>(r.seed), r.avg_position_error,
                     r.avg_measured_pair_error, r.avg_unmeasured_pair_error, r.dr_final_error,
                     r.final_gamma_estimate, r.final_gamma_true, r.weight_reset_events,
                     r.incomplete_packet_events, r.left_map ? 1 : 0, r.aborted ? 1 : 0);
    }
    std::fclose(f);
}

void write_summary_csv(const std::string& path, std::span<const MonteCarloSummary> summaries) {
    std::FILE* f = open_or_throw(path);
    std::fprintf(f, "case,n_trials,mean_avg_position_error_m,std_avg_position_error_m,"
                    "mean_measured_pair_error_m,std_measured_pair_error_m,"
                    "mean_unmeasured_pair_error_m,std_unmeasured_pair_error_m,"
                    "mean_dr_final_error_m,std_dr_final_error_m,weight_reset_trials,"
                    "left_map_trials,aborted_trials\n");
    for (const auto& s : summaries) {
        std::fprintf(f, "%s,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%d\n",
                     s.case_name.c_str(), s.n_trials, s.mean_avg_position_error,
                     s.std_avg_position_error, s.mean_measured_pair_error,
                     s.std_measured_pair_error, s.mean_unmeasured_pair_error,
                     s.std_unmeasured_pair_error, s.mean_dr_final_error, s.std_dr_final_error,
                     s.weight_reset_trials, s.left_map_trials, s.aborted_trials);
    }
    std::fclose(f);
}

void write_cdf_csv(const std::string& path, const MonteCarloSummary& summary) {
    std::vector<double> errors;
    errors.reserve(summary.trials.size());
    for (const auto& t : summary.trials) errors.push_back(t.avg_position_error);
    std::sort(errors.begin(), errors.end());
    std::FILE* f = open_or_throw(path);
    std::fprintf(f, "avg_position_error_m,cumulative_probability\n");
    for (std::size_t i = 0; i < errors.size(); ++i)
        std::fprintf(f, "%.17g,%.17g\n", errors[i],
                     static_cast<double>(i + 1) / static_cast<double>(errors.size()));
    std::fclose(f);
}

void write_boxplot_csv(const std::string& path, std::span<const MonteCarloSummary> summaries) {
    std::FILE* f = open_or_throw(path);
    std::fprintf(f, "case,min_m,q1_m,median_m,q3_m,max_m\n");
    for (const auto& s : summaries) {
        std::vector<double> errors;
        errors.reserve(s.trials.size());
        for (const auto& t : s.trials) errors.push_back(t.avg_position_error);
        const auto b = boxplot_stats(std::move(errors));
        std::fprintf(f, "%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.case_name.c_str(), b[0], b[1],
                     b[2], b[3], b[4]);
    }
    std::fclose(f);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    return fields;
}

double parse_csv_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ParseError("bad numeric field in trials.csv: '" + s + "'");
    return v;
}

} // namespace

MonteCarloSummary summarize_trials_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + " is empty");

    MonteCarloSummary summary;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 12)
            throw ParseError("trials.csv row has " + std::to_string(fields.size()) +
                             " fields, expected 12");
        TrialResult r;
        r.seed = static_cast<std::uint64_t>(std::stoull(fields[1]));
        r.avg_position_error = parse_csv_double(fields[2]);
        r.avg_measured_pair_error = parse_csv_double(fields[3]);
        r.avg_unmeasured_pair_error = parse_csv_double(fields[4]);
        r.dr_final_error = parse_csv_double(fields[5]);
        r.final_gamma_estimate = parse_csv_double(fields[6]);
        r.final_gamma_true = parse_csv_double(fields[7]);
        r.weight_reset_events = static_cast<int>(parse_csv_double(fields[8]));
        r.incomplete_packet_events = static_cast<int>(parse_csv_double(fields[9]));
        r.left_map = fields[10] == "1";
        r.aborted = fields[11] == "1";
        summary.trials.push_back(std::move(r));
    }
    aggregate(summary);
    return summary;
}

} // namespace coopnav
