#pragma once

#include <array>
#include <span>
#include <vector>

#include "coopnav/geometry.hpp"
#include "coopnav/magmap.hpp"
#include "coopnav/rng.hpp"

namespace coopnav {

/// Particle state: own global pose plus the group rotation error gamma.
/// Four states regardless of group size.
struct Particle {
    double x = 0.0;     // m
    double y = 0.0;     // m
    double theta = 0.0; // rad
    double gamma = 0.0; // rad
};

struct PfConfig {
    int particle_count = 10000;
    double position_noise_std = 0.3;    // m per step
    double heading_noise_std = 2e-4;    // rad per step
    double gamma_noise_std = 5e-4;      // rad per step (gamma random walk)
    double magnetic_sigma = 10.0;       // likelihood sigma, nT, > 0
    double resample_threshold = 0.5;    // resample when ESS < threshold * M
    double ts = 0.2;                    // s
};

/// Initial particle cloud: Gaussian around the handed-off pose estimate.
struct PfInit {
    Pose2D center;
    double position_std = 1.0;  // m
    double heading_std = 0.0;   // rad
    double gamma_std = 0.0;     // rad
};

/// 2D rotation of a relative position by the group rotation error.
inline std::array<double, 2> rotate_relative(const std::array<double, 2>& rel, double gamma) {
    const double c = std::cos(gamma);
    const double s = std::sin(gamma);
    return {c * rel[0] - s * rel[1], s * rel[0] + c * rel[1]};
}

/// Predicted global position of the UAV behind `rel` given one particle.
inline std::array<double, 2> predicted_position(const Particle& p,
                                                const std::array<double, 2>& rel) {
    const auto r = rotate_relative(rel, p.gamma);
    return {p.x + r[0], p.y + r[1]};
}

/// Cooperative magnetic localization: one per UAV. Fuses all N magnetometer
/// readings through the group's relative geometry against the anomaly map.
class MagneticParticleFilter {
public:
    MagneticParticleFilter(const PfConfig& cfg, const PfInit& init, RandomStream* stream);

    /// Test/oracle constructor from an explicit particle cloud.
    MagneticParticleFilter(const PfConfig& cfg, std::vector<Particle> particles,
                           std::vector<double> weights, RandomStream* stream);

    int particle_count() const { return static_cast<int>(particles_.size()); }
    const std::vector<Particle>& particles() const { return particles_; }
    const std::vector<double>& weights() const { return weights_; }

    /// Advance every particle with the UAV's own measured controls plus
    /// process noise; gamma takes a pure random walk. Weights unchanged.
    void propagate(const ControlMeasurement& own_control);

    /// Multiply each weight by the product of per-UAV Gaussian likelihoods
    /// of the measurements given the particle's predicted positions, then
    /// renormalize. rel_positions[j] is the relative position of UAV j with
    /// respect to this filter's owner (self entry = (0,0)); measurements[j]
    /// is UAV j's magnetometer reading. Predicted positions outside the map
    /// get likelihood 0. Computed in the log domain; if every weight
    /// underflows the cloud is reset to uniform and the event counted.
    void weight_update(std::span<const std::array<double, 2>> rel_positions,
                       std::span<const double> measurements, const MagneticMap& map);

    /// Systematic resampling when ESS drops below the configured fraction
    /// of M; returns true when a resample happened.
    bool maybe_resample();

    double effective_sample_size() const;

    /// Weighted mean state; circular mean for theta and gamma.
    Particle expectation() const;

    int weight_reset_count() const { return weight_resets_; }

private:
    void reset_uniform();

    PfConfig cfg_;
    std::vector<Particle> particles_;
    std::vector<double> weights_;
    std::vector<double> log_weights_; // log of the normalized weights
    RandomStream* stream_;
    int weight_resets_ = 0;
};

} // namespace coopnav
