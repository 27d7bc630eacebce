#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace coopnav {

inline constexpr double kPi = std::numbers::pi;

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);
    if (a == -kPi) a = kPi;
    return a;
}

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Planar pose in local east/north meters, heading in radians
/// (0 = east, counterclockwise positive), wrapped to (-pi, pi].
struct Pose2D {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
};

/// One odometry sample: forward velocity and yaw rate.
struct ControlMeasurement {
    double velocity = 0.0; // m/s
    double yaw_rate = 0.0; // rad/s
};

/// Discrete unicycle step: the heading is advanced by ts*omega before the
/// velocity is projected, and the same rule is shared by the truth
/// propagation, the EKF prediction, and the particle prediction.
inline Pose2D step_pose(const Pose2D& pose, const ControlMeasurement& u, double ts) {
    const double heading = pose.theta + ts * u.yaw_rate;
    return Pose2D{pose.x + ts * u.velocity * std::cos(heading),
                  pose.y + ts * u.velocity * std::sin(heading),
                  wrap_angle(heading)};
}

/// Iterate step_pose over a control sequence (dead reckoning).
inline Pose2D integrate_controls(Pose2D pose, std::span<const ControlMeasurement> controls,
                                 double ts) {
    for (const auto& u : controls) pose = step_pose(pose, u, ts);
    return pose;
}

inline double planar_distance(const Pose2D& a, const Pose2D& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

} // namespace coopnav
