#include "coopnav/world.hpp"

#include <algorithm>

namespace coopnav {

double reference_velocity(const ReferenceProfile& profile, double t) {
    return profile.vel_baseline +
           profile.vel_amplitude * std::sin(profile.vel_angular_frequency * t + profile.vel_phase);
}

ControlMeasurement track_control(const Pose2D& estimated_pose, const ReferenceProfile& profile,
                                 double t, const ControllerConfig& cfg) {
    // Cross-track error relative to the east-heading reference line; a
    // positive error (north of track) demands a negative approach heading.
    const double cross_track = estimated_pose.y - profile.track_north;
    double approach = -cfg.cross_track_gain * cross_track;
    approach = std::clamp(approach, -cfg.max_approach_angle, cfg.max_approach_angle);
    const double heading_error = wrap_angle(estimated_pose.theta - approach);
    const double omega = std::clamp(-cfg.heading_gain * heading_error,
                                    -cfg.max_yaw_rate, cfg.max_yaw_rate);
    return ControlMeasurement{reference_velocity(profile, t), omega};
}

OdometrySensor::OdometrySensor(const NoiseConfig& noise, RandomStream* stream)
    : sigma_v_(noise.sigma_v),
      sigma_g_(noise.sigma_g),
      bias_v_(stream->gaussian(0.0, noise.bias_v_std)),
      bias_g_(stream->gaussian(0.0, noise.bias_g_std)),
      stream_(stream) {}

ControlMeasurement OdometrySensor::measure(const ControlMeasurement& truth) {
    return ControlMeasurement{truth.velocity + bias_v_ + stream_->gaussian(0.0, sigma_v_),
                              truth.yaw_rate + bias_g_ + stream_->gaussian(0.0, sigma_g_)};
}

double measure_range(const Pose2D& a, const Pose2D& b, double sigma_r, RandomStream& stream) {
    return planar_distance(a, b) + stream.gaussian(0.0, sigma_r);
}

} // namespace coopnav
