#pragma once

#include <vector>

#include "coopnav/geometry.hpp"
#include "coopnav/rng.hpp"

namespace coopnav {

/// Sensor noise levels. Yaw-rate quantities are stored in rad/s; config
/// files take deg/s and convert at load.
struct NoiseConfig {
    double sigma_r = 1.0;      // ranging, m
    double sigma_m = 10.0;     // magnetometer, nT
    double sigma_v = 0.3;      // velocity, m/s
    double sigma_g = 0.0;      // yaw rate, rad/s
    double bias_v_std = 0.0;   // turn-on velocity bias std, m/s
    double bias_g_std = 0.0;   // turn-on yaw-rate bias std, rad/s
};

/// East-heading reference track at a fixed northing, with a slowly varying
/// sine velocity profile (keeps the ranging geometry observable).
struct ReferenceProfile {
    double track_north = 0.0;            // m
    double vel_amplitude = 10.0;         // m/s
    double vel_baseline = 50.0;          // m/s
    double vel_angular_frequency = 0.05; // rad/s
    double vel_phase = 0.0;              // rad
};

double reference_velocity(const ReferenceProfile& profile, double t);

/// Proportional cross-track / heading steering with a yaw-rate clamp. The
/// filters only need the closed loop to roughly hold the reference line.
struct ControllerConfig {
    double heading_gain = 1.0;        // 1/s
    double cross_track_gain = 0.01;   // rad/m of cross-track error
    double max_approach_angle = 0.35; // rad
    double max_yaw_rate = 0.2;        // rad/s
};

/// Commanded velocity (feed-forward from the profile) and yaw rate computed
/// from the estimated pose.
ControlMeasurement track_control(const Pose2D& estimated_pose, const ReferenceProfile& profile,
                                 double t, const ControllerConfig& cfg);

/// Velocity / yaw-rate sensor with white noise plus a turn-on bias drawn
/// once at construction (once per UAV per trial).
class OdometrySensor {
public:
    OdometrySensor(const NoiseConfig& noise, RandomStream* stream);

    ControlMeasurement measure(const ControlMeasurement& truth);

    double bias_v() const { return bias_v_; }
    double bias_g() const { return bias_g_; }

private:
    double sigma_v_;
    double sigma_g_;
    double bias_v_;
    double bias_g_;
    RandomStream* stream_;
};

/// Noisy range between two true poses.
double measure_range(const Pose2D& a, const Pose2D& b, double sigma_r, RandomStream& stream);

} // namespace coopnav
