#include "coopnav/trial.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <memory>

#include "coopnav/comm.hpp"
#include "coopnav/montecarlo.hpp"
#include "coopnav/ranging_ekf.hpp"
#include "coopnav/rng.hpp"

namespace coopnav {

namespace {

// Salts for the independent per-trial random streams.
constexpr std::uint64_t kInitSalt = 0x696e6974ULL;
constexpr std::uint64_t kRangingSalt = 0x726e67ULL;
constexpr std::uint64_t kSensorSaltBase = 0x73656e730000ULL;
constexpr std::uint64_t kPfSaltBase = 0x70660000ULL;

// Rotation angle that best aligns the estimated relative positions with the
// true ones (2D Procrustes): the current rotation error of the group shape.
double procrustes_rotation(std::span<const std::array<double, 2>> estimated,
                           std::span<const std::array<double, 2>> truth) {
    double cross = 0.0, dot = 0.0;
    for (std::size_t i = 0; i < estimated.size(); ++i) {
        cross += estimated[i][0] * truth[i][1] - estimated[i][1] * truth[i][0];
        dot += estimated[i][0] * truth[i][0] + estimated[i][1] * truth[i][1];
    }
    return (cross == 0.0 && dot == 0.0) ? 0.0 : std::atan2(cross, dot);
}

class TraceWriter {
public:
    TraceWriter(const TraceConfig& cfg, int n_uavs) {
        if (!cfg.enabled) return;
        std::filesystem::create_directories(cfg.directory);
        const auto open = [&](const char* name, const char* header) {
            std::FILE* f = std::fopen((std::filesystem::path(cfg.directory) / name).c_str(), "w");
            if (f) std::fputs(header, f);
            return f;
        };
        truth_ = open("truth.csv", "k,uav,x_true,y_true,theta_true\n");
        ekf_ = open("ekf.csv", "k,uav,x_est,y_est,theta_est,cov_trace\n");
        pf_ = open("pf.csv", "k,uav,x_pf,y_pf,theta_pf,gamma_pf,ess\n");
        packets_ = open("packets.csv", "k,uav,field,value\n");
        (void)n_uavs;
    }
    ~TraceWriter() {
        for (std::FILE* f : {truth_, ekf_, pf_, packets_})
            if (f) std::fclose(f);
    }

    void truth_row(std::int64_t k, int uav, const Pose2D& p) {
        if (truth_)
            std::fprintf(truth_, "%lld,%d,%.17g,%.17g,%.17g\n",
                         static_cast<long long>(k), uav, p.x, p.y, p.theta);
    }
    void ekf_row(std::int64_t k, int uav, const Pose2D& p, double cov_trace) {
        if (ekf_)
            std::fprintf(ekf_, "%lld,%d,%.17g,%.17g,%.17g,%.17g\n",
                         static_cast<long long>(k), uav, p.x, p.y, p.theta, cov_trace);
    }
    void pf_row(std::int64_t k, int uav, const Particle& p, double ess) {
        if (pf_)
            std::fprintf(pf_, "%lld,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                         static_cast<long long>(k), uav, p.x, p.y, p.theta, p.gamma, ess);
    }
    void packet_rows(const Packet& packet) {
        if (!packets_) return;
        const auto k = static_cast<long long>(packet.time_index);
        for (std::size_t uav = 0; uav < packet.entries.size(); ++uav) {
            const auto& e = packet.entries[uav];
            if (!e) continue;
            std::fprintf(packets_, "%lld,%zu,velocity,%.17g\n", k, uav, e->velocity);
            std::fprintf(packets_, "%lld,%zu,yaw_rate,%.17g\n", k, uav, e->yaw_rate);
            std::fprintf(packets_, "%lld,%zu,magnetic,%.17g\n", k, uav, e->magnetic);
            if (e->range) {
                std::fprintf(packets_, "%lld,%zu,range_partner,%d\n", k, uav, e->range->partner);
                std::fprintf(packets_, "%lld,%zu,range,%.17g\n", k, uav, e->range->distance);
            }
        }
    }

private:
    std::FILE* truth_ = nullptr;
    std::FILE* ekf_ = nullptr;
    std::FILE* pf_ = nullptr;
    std::FILE* packets_ = nullptr;
};

} // namespace

void TrialConfig::validate() const {
    if (group_size < 1) throw InvalidSpecError("group_size must be >= 1");
    if (!(duration > 0.0) || duration < filter_period)
        throw InvalidSpecError("duration must cover at least one filter period");
    if (!(filter_period > 0.0)) throw InvalidSpecError("filter_period must be > 0");
    if (odometry_substeps < 1) throw InvalidSpecError("odometry_substeps must be >= 1");
    if (noise.sigma_r < 0.0 || noise.sigma_m < 0.0 || noise.sigma_v < 0.0 || noise.sigma_g < 0.0)
        throw InvalidSpecError("noise sigmas must be >= 0");
    if (!(reference.vel_baseline > reference.vel_amplitude) || reference.vel_amplitude < 0.0)
        throw InvalidSpecError("reference velocity must stay positive (baseline > amplitude >= 0)");
    if (pf.particle_count < 1) throw InvalidSpecError("particle_count must be >= 1");
    if (pf.resample_threshold < 0.0 || pf.resample_threshold > 1.0)
        throw InvalidSpecError("resample_threshold must be in [0, 1]");
    const bool has_file = map.grid_file.has_value();
    const bool has_synth = map.synthetic.has_value();
    if (has_file == has_synth)
        throw InvalidSpecError("config must name exactly one map source (grid_file or synthetic)");
}

double TrialConfig::likelihood_sigma() const {
    const double sigma = likelihood_sigma_override.value_or(noise.sigma_m);
    return sigma > 1e-3 ? sigma : 1e-3;
}

double error_window_start(double duration) {
    return duration > 120.0 ? 60.0 : 0.0;
}

MagneticMap build_map(const TrialConfig& cfg) {
    cfg.validate();
    MagneticMap out;
    if (cfg.map.grid_file) {
        out = load_grid(*cfg.map.grid_file);
    } else {
        SyntheticMapSpec spec = *cfg.map.synthetic;
        if (!(spec.extent_east > 0.0) || !(spec.extent_north > 0.0)) {
            // Auto-size the coverage from the flight envelope plus margin so
            // trajectories cannot leave the map under sane noise levels.
            const double margin = cfg.map.margin;
            spec.origin_east = -margin;
            spec.origin_north = -margin;
            spec.extent_east = cfg.duration * cfg.max_reference_velocity() + 2.0 * margin;
            spec.extent_north =
                (cfg.group_size - 1) * cfg.reference.track_spacing + 2.0 * margin;
        }
        if (spec.bump_count < 0) {
            const double area_km2 = spec.extent_east * spec.extent_north / 1e6;
            spec.bump_count =
                static_cast<int>(std::ceil(area_km2 * cfg.map.bump_density_per_km2));
        }
        out = generate_synthetic(spec);
    }
    if (cfg.low_resolution.enabled)
        out = degrade_resolution(out, cfg.low_resolution.smoothing_sigma);
    return out;
}

TrialResult run_trial(const TrialConfig& cfg, std::uint64_t seed) {
    return run_trial(cfg, seed, build_map(cfg));
}

TrialResult run_trial(const TrialConfig& cfg, std::uint64_t seed, const MagneticMap& map) {
    cfg.validate();
    const int n = cfg.group_size;
    const int horizon = n >= 2 ? propagation_steps(n) : 0;
    const double ts = cfg.filter_period;
    const int substeps = cfg.odometry_substeps;
    const double dt = ts / substeps;
    const auto n_epochs = static_cast<std::int64_t>(std::llround(cfg.duration / ts));

    TrialResult result;
    result.seed = seed;

    RandomStream init_rng(mix_seed(seed, kInitSalt));
    RandomStream range_rng(mix_seed(seed, kRangingSalt));
    std::vector<RandomStream> sensor_rng;
    std::vector<RandomStream> pf_rng;
    for (int i = 0; i < n; ++i) sensor_rng.emplace_back(mix_seed(seed, kSensorSaltBase + i));
    for (int i = 0; i < n; ++i) pf_rng.emplace_back(mix_seed(seed, kPfSaltBase + i));

    // reference profiles: parallel east-heading tracks, per-UAV random phase
    std::vector<ReferenceProfile> profiles(n);
    for (int i = 0; i < n; ++i) {
        profiles[i] = ReferenceProfile{i * cfg.reference.track_spacing,
                                       cfg.reference.vel_amplitude, cfg.reference.vel_baseline,
                                       cfg.reference.vel_angular_frequency,
                                       init_rng.uniform(0.0, 2.0 * kPi)};
    }

    // initial truth and handed-off estimates
    std::vector<Pose2D> truth(n);
    for (int i = 0; i < n; ++i) {
        truth[i] = Pose2D{init_rng.gaussian(0.0, cfg.init.true_position_jitter),
                          profiles[i].track_north +
                              init_rng.gaussian(0.0, cfg.init.true_position_jitter),
                          0.0};
    }
    std::vector<Pose2D> initial_estimate(n);
    for (int i = 0; i < n; ++i) {
        initial_estimate[i] =
            Pose2D{truth[i].x + init_rng.gaussian(0.0, cfg.init.estimate_position_std),
                   truth[i].y + init_rng.gaussian(0.0, cfg.init.estimate_position_std),
                   wrap_angle(init_rng.gaussian(0.0, cfg.init.estimate_heading_std))};
    }
    if (cfg.init.group_rotation_error != 0.0 && n >= 2) {
        // Rotate the estimated shape about UAV 0 by -err so the true group
        // rotation error starts at +err.
        const double c = std::cos(-cfg.init.group_rotation_error);
        const double s = std::sin(-cfg.init.group_rotation_error);
        for (int i = 1; i < n; ++i) {
            const double dx = initial_estimate[i].x - initial_estimate[0].x;
            const double dy = initial_estimate[i].y - initial_estimate[0].y;
            initial_estimate[i].x = initial_estimate[0].x + c * dx - s * dy;
            initial_estimate[i].y = initial_estimate[0].y + s * dx + c * dy;
        }
    }

    std::vector<OdometrySensor> odometry;
    odometry.reserve(n);
    for (int i = 0; i < n; ++i) odometry.emplace_back(cfg.noise, &sensor_rng[i]);

    EkfConfig ekf_cfg;
    ekf_cfg.ts = ts;
    ekf_cfg.ranging_variance = std::max(cfg.noise.sigma_r * cfg.noise.sigma_r, 1e-6);
    ekf_cfg.process_noise = default_process_noise(cfg.noise.sigma_v, cfg.noise.sigma_g, ts,
                                                  cfg.ekf.process_noise_inflation);
    const Eigen::Vector3d init_var(
        std::max(cfg.init.estimate_position_std * cfg.init.estimate_position_std, 1e-12),
        std::max(cfg.init.estimate_position_std * cfg.init.estimate_position_std, 1e-12),
        std::max(cfg.init.estimate_heading_std * cfg.init.estimate_heading_std, 1e-12));
    // Every UAV would run an identical copy of the stacked EKF on the same
    // complete packets, so one shared instance is computed per trial.
    RangingEkf ekf(initial_estimate, init_var, ekf_cfg);

    PfConfig pf_cfg = cfg.pf;
    pf_cfg.ts = ts;
    pf_cfg.magnetic_sigma = cfg.likelihood_sigma();
    std::vector<MagneticParticleFilter> filters;
    filters.reserve(n);
    for (int i = 0; i < n; ++i) {
        filters.emplace_back(pf_cfg,
                             PfInit{initial_estimate[i], cfg.init.estimate_position_std,
                                    cfg.init.estimate_heading_std, cfg.init.gamma_init_std},
                             &pf_rng[i]);
    }

    std::vector<PacketStore> stores;
    stores.reserve(n);
    for (int i = 0; i < n; ++i) stores.emplace_back(n, horizon);

    std::vector<Pose2D> current_estimate = initial_estimate;
    Pose2D dr_shadow = initial_estimate[0];

    // per-epoch histories (epoch 0 = initial condition)
    std::vector<std::vector<Pose2D>> truth_history{truth};
    std::vector<Pose2D> truth0_series{truth[0]};
    std::vector<Pose2D> estimate0_series{initial_estimate[0]};
    std::vector<Pose2D> dr0_series{dr_shadow};

    DistanceErrorAccumulator distance_errors(n);
    TraceWriter trace(cfg.trace, n);
    for (int i = 0; i < n; ++i) trace.truth_row(0, i, truth[i]);

    if (cfg.monitor_covariance) {
        result.min_covariance_eigenvalue = std::numeric_limits<double>::infinity();
        result.max_covariance_asymmetry = 0.0;
    }
    const auto monitor_covariance = [&]() {
        if (!cfg.monitor_covariance) return;
        const Eigen::MatrixXd& p = ekf.estimate().covariance;
        result.max_covariance_asymmetry = std::max(
            result.max_covariance_asymmetry, (p - p.transpose()).cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p);
        result.min_covariance_eigenvalue =
            std::min(result.min_covariance_eigenvalue, eig.eigenvalues().minCoeff());
    };

    std::vector<ControlMeasurement> epoch_controls(n);
    std::int64_t last_processed = 0;

    for (std::int64_t k = 1; k <= n_epochs; ++k) {
        // --- 1) odometry-rate closed loop (controller + truth + sensors)
        std::vector<double> v_sum(n, 0.0), w_sum(n, 0.0);
        for (int sub = 0; sub < substeps; ++sub) {
            const double t = (static_cast<double>(k) - 1.0) * ts + sub * dt;
            for (int i = 0; i < n; ++i) {
                const ControlMeasurement command =
                    track_control(current_estimate[i], profiles[i], t, cfg.controller);
                const ControlMeasurement measured = odometry[i].measure(command);
                truth[i] = step_pose(truth[i], command, dt);
                current_estimate[i] = step_pose(current_estimate[i], measured, dt);
                if (i == 0) dr_shadow = step_pose(dr_shadow, measured, dt);
                v_sum[i] += measured.velocity;
                w_sum[i] += measured.yaw_rate;
            }
        }
        truth_history.push_back(truth);
        truth0_series.push_back(truth[0]);
        for (int i = 0; i < n; ++i) trace.truth_row(k, i, truth[i]);

        // --- 2) 5 Hz sensing: magnetometer, pairwise ranging, own packet
        const auto edges = edge_set(n, k);
        bool off_map = false;
        std::vector<MeasurementEntry> entries(n);
        for (int i = 0; i < n; ++i) {
            const auto field = map.try_sample(truth[i].x, truth[i].y);
            if (!field) {
                off_map = true;
                break;
            }
            entries[i].velocity = v_sum[i] / substeps;
            entries[i].yaw_rate = w_sum[i] / substeps;
            entries[i].magnetic = *field + sensor_rng[i].gaussian(0.0, cfg.noise.sigma_m);
        }
        if (off_map) {
            result.left_map = true;
            result.aborted = true;
            break;
        }
        for (const auto& [a, b] : edges) {
            const double d = measure_range(truth[a], truth[b], cfg.noise.sigma_r, range_rng);
            entries[a].range = RangeObservation{b, d};
            entries[b].range = RangeObservation{a, d};
        }
        for (int i = 0; i < n; ++i) stores[i].insert(k, i, entries[i]);

        // --- 3) pairwise exchange (instantaneous, lossless) and pruning
        for (const auto& [a, b] : edges) {
            stores[a].merge_from(stores[b], k);
            stores[b].merge_from(stores[a], k);
        }
        for (int i = 0; i < n; ++i) stores[i].drop_before(k - horizon);

        // --- 4) filters run on the complete packet at k - horizon
        if (k > horizon) {
            const std::int64_t kd = k - horizon;
            const Packet* delayed = stores[0].packet(kd);
            if (!delayed || !delayed->complete()) {
                ++result.incomplete_packet_events;
            } else {
                for (int i = 0; i < n; ++i) {
                    const auto& e = *delayed->entries[i];
                    epoch_controls[i] = ControlMeasurement{e.velocity, e.yaw_rate};
                }
                ekf.predict(epoch_controls);
                monitor_covariance();
                std::vector<RangeMeasurement> ranges;
                for (const auto& [a, b] : edge_set(n, kd)) {
                    const auto& obs = delayed->entries[a]->range;
                    if (obs && obs->partner == b)
                        ranges.push_back(RangeMeasurement{a, b, obs->distance});
                }
                ekf.update(ranges);
                monitor_covariance();

                const auto ekf_poses = ekf.poses();
                distance_errors.add_step(truth_history[kd], ekf_poses);
                for (int i = 0; i < n; ++i)
                    trace.ekf_row(kd, i, ekf_poses[i], ekf.estimate().covariance.trace());
                trace.packet_rows(*delayed);

                for (int j = 0; j < n; ++j) {
                    const Packet* own = stores[j].packet(kd);
                    if (!own || !own->complete()) {
                        ++result.incomplete_packet_events;
                        continue;
                    }
                    const auto rel = relative_positions(ekf_poses, j);
                    std::vector<double> magnetics(n);
                    for (int i = 0; i < n; ++i) magnetics[i] = own->entries[i]->magnetic;
                    const auto& own_entry = *own->entries[j];
                    filters[j].propagate(
                        ControlMeasurement{own_entry.velocity, own_entry.yaw_rate});
                    filters[j].weight_update(rel, magnetics, map);
                    filters[j].maybe_resample();

                    const Particle mean = filters[j].expectation();
                    if (j == 0) result.final_gamma_estimate = mean.gamma;
                    trace.pf_row(kd, j, mean, filters[j].effective_sample_size());
                    // incremental dead-reckoning from kd to now with the
                    // UAV's own stored controls
                    Pose2D pose{mean.x, mean.y, mean.theta};
                    for (std::int64_t q = kd + 1; q <= k; ++q) {
                        const auto& e = *stores[j].packet(q)->entries[j];
                        pose = step_pose(pose, ControlMeasurement{e.velocity, e.yaw_rate}, ts);
                    }
                    current_estimate[j] = pose;
                }
                last_processed = kd;
            }
        }

        estimate0_series.push_back(current_estimate[0]);
        dr0_series.push_back(dr_shadow);
    }

    // --- summary metrics
    const auto position = compute_position_errors(truth0_series, estimate0_series, dr0_series,
                                                  ts, error_window_start(cfg.duration));
    result.pf_error_series = position.estimate_error_series;
    result.dr_error_series = position.dr_error_series;
    result.avg_position_error = position.avg_estimate_error;
    result.dr_final_error = position.dr_final_error;
    result.measured_error_series = distance_errors.measured_series();
    result.unmeasured_error_series = distance_errors.unmeasured_series();
    result.avg_measured_pair_error = distance_errors.average_measured();
    result.avg_unmeasured_pair_error = distance_errors.average_unmeasured();

    for (int i = 0; i < n; ++i) result.weight_reset_events += filters[i].weight_reset_count();

    if (n >= 2 && last_processed >= 1) {
        const auto est_rel = relative_positions(ekf.poses(), 0);
        const auto true_rel = relative_positions(truth_history[last_processed], 0);
        result.final_gamma_true = procrustes_rotation(est_rel, true_rel);
    }
    if (cfg.monitor_covariance && !std::isfinite(result.min_covariance_eigenvalue))
        result.min_covariance_eigenvalue = 0.0; // no update ever ran

    return result;
}

} // namespace coopnav
