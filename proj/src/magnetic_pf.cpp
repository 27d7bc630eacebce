#include "coopnav/magnetic_pf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coopnav {

MagneticParticleFilter::MagneticParticleFilter(const PfConfig& cfg, const PfInit& init,
                                               RandomStream* stream)
    : cfg_(cfg), stream_(stream) {
    if (cfg_.particle_count < 1) throw std::invalid_argument("particle_count must be >= 1");
    if (!(cfg_.magnetic_sigma > 0.0)) throw std::invalid_argument("magnetic_sigma must be > 0");
    particles_.resize(cfg_.particle_count);
    for (auto& p : particles_) {
        p.x = stream_->gaussian(init.center.x, init.position_std);
        p.y = stream_->gaussian(init.center.y, init.position_std);
        p.theta = wrap_angle(stream_->gaussian(init.center.theta, init.heading_std));
        p.gamma = wrap_angle(stream_->gaussian(0.0, init.gamma_std));
    }
    weights_.assign(particles_.size(), 1.0 / static_cast<double>(particles_.size()));
    log_weights_.assign(particles_.size(), -std::log(static_cast<double>(particles_.size())));
}

MagneticParticleFilter::MagneticParticleFilter(const PfConfig& cfg,
                                               std::vector<Particle> particles,
                                               std::vector<double> weights,
                                               RandomStream* stream)
    : cfg_(cfg), particles_(std::move(particles)), weights_(std::move(weights)),
      stream_(stream) {
    if (particles_.empty() || particles_.size() != weights_.size())
        throw std::invalid_argument("particles and weights must be non-empty and equal-sized");
    double sum = 0.0;
    for (double w : weights_) sum += w;
    if (!(sum > 0.0)) throw std::invalid_argument("weights must have a positive sum");
    for (double& w : weights_) w /= sum;
    log_weights_.resize(particles_.size());
    for (std::size_t i = 0; i < weights_.size(); ++i)
        log_weights_[i] = weights_[i] > 0.0 ? std::log(weights_[i])
                                            : -std::numeric_limits<double>::infinity();
}

void MagneticParticleFilter::propagate(const ControlMeasurement& u) {
    const double ts = cfg_.ts;
    const double dtheta = ts * u.yaw_rate;
    for (auto& p : particles_) {
        const double heading = p.theta + dtheta;
        p.x += ts * u.velocity * std::cos(heading) +
               stream_->gaussian(0.0, cfg_.position_noise_std);
        p.y += ts * u.velocity * std::sin(heading) +
               stream_->gaussian(0.0, cfg_.position_noise_std);
        p.theta = wrap_angle(heading + stream_->gaussian(0.0, cfg_.heading_noise_std));
        p.gamma = wrap_angle(p.gamma + stream_->gaussian(0.0, cfg_.gamma_noise_std));
    }
}

void MagneticParticleFilter::weight_update(std::span<const std::array<double, 2>> rel_positions,
                                           std::span<const double> measurements,
                                           const MagneticMap& map) {
    if (rel_positions.size() != measurements.size())
        throw std::invalid_argument("need one relative position per measurement");
    const std::size_t n_uavs = measurements.size();
    const double inv_two_sigma2 = 1.0 / (2.0 * cfg_.magnetic_sigma * cfg_.magnetic_sigma);
    constexpr double kDead = -std::numeric_limits<double>::infinity();
    const GridSampler sample(map);

    double max_lw = kDead;
    for (std::size_t i = 0; i < particles_.size(); ++i) {
        const Particle& p = particles_[i];
        const double c = std::cos(p.gamma);
        const double s = std::sin(p.gamma);
        double sq_sum = 0.0;
        bool off_map = false;
        for (std::size_t j = 0; j < n_uavs; ++j) {
            const double rx = rel_positions[j][0];
            const double ry = rel_positions[j][1];
            const auto predicted = sample(p.x + c * rx - s * ry, p.y + s * rx + c * ry);
            if (!predicted) {
                off_map = true;
                break;
            }
            const double resid = measurements[j] - *predicted;
            sq_sum += resid * resid;
        }
        // w_k = p(y | p) * normalized w_{k-1}; the Gaussian normalization
        // constant is shared by all particles and cancels below.
        const double lw =
            off_map ? kDead : -sq_sum * inv_two_sigma2 + log_weights_[i];
        log_weights_[i] = lw;
        max_lw = std::max(max_lw, lw);
    }

    if (max_lw == kDead) {
        // Total weight collapse: every predicted position off-map or every
        // prior weight dead. Reset to uniform and flag the trial.
        reset_uniform();
        ++weight_resets_;
        return;
    }

    double sum = 0.0;
    for (std::size_t i = 0; i < particles_.size(); ++i) {
        const double w = log_weights_[i] == kDead ? 0.0 : std::exp(log_weights_[i] - max_lw);
        weights_[i] = w;
        sum += w;
    }
    const double inv_sum = 1.0 / sum;
    const double log_sum = std::log(sum);
    for (std::size_t i = 0; i < particles_.size(); ++i) {
        weights_[i] *= inv_sum;
        log_weights_[i] = log_weights_[i] == kDead ? kDead : log_weights_[i] - max_lw - log_sum;
    }
}

void MagneticParticleFilter::reset_uniform() {
    const auto m = static_cast<double>(particles_.size());
    weights_.assign(particles_.size(), 1.0 / m);
    log_weights_.assign(particles_.size(), -std::log(m));
}

double MagneticParticleFilter::effective_sample_size() const {
    double sum_sq = 0.0;
    for (double w : weights_) sum_sq += w * w;
    return 1.0 / sum_sq;
}

bool MagneticParticleFilter::maybe_resample() {
    const auto m = particles_.size();
    if (effective_sample_size() >= cfg_.resample_threshold * static_cast<double>(m))
        return false;

    // systematic resampling: one uniform offset, m evenly spaced pointers
    std::vector<Particle> resampled;
    resampled.reserve(m);
    const double step = 1.0 / static_cast<double>(m);
    double pointer = stream_->uniform() * step;
    double cumulative = weights_[0];
    std::size_t idx = 0;
    for (std::size_t i = 0; i < m; ++i) {
        while (pointer > cumulative && idx + 1 < m) {
            ++idx;
            cumulative += weights_[idx];
        }
        resampled.push_back(particles_[idx]);
        pointer += step;
    }
    particles_ = std::move(resampled);
    reset_uniform();
    return true;
}

Particle MagneticParticleFilter::expectation() const {
    double x = 0.0, y = 0.0;
    double sin_t = 0.0, cos_t = 0.0, sin_g = 0.0, cos_g = 0.0;
    for (std::size_t i = 0; i < particles_.size(); ++i) {
        const double w = weights_[i];
        const Particle& p = particles_[i];
        x += w * p.x;
        y += w * p.y;
        sin_t += w * std::sin(p.theta);
        cos_t += w * std::cos(p.theta);
        sin_g += w * std::sin(p.gamma);
        cos_g += w * std::cos(p.gamma);
    }
    return Particle{x, y, std::atan2(sin_t, cos_t), std::atan2(sin_g, cos_g)};
}

} // namespace coopnav
