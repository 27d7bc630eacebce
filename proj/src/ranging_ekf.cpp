#include "coopnav/ranging_ekf.hpp"

#include <cmath>
#include <stdexcept>

namespace coopnav {

Eigen::Matrix3d default_process_noise(double sigma_v, double sigma_g, double ts,
                                      double inflation) {
    Eigen::Matrix3d q = Eigen::Matrix3d::Zero();
    q(0, 0) = q(1, 1) = inflation * sigma_v * sigma_v * ts * ts;
    q(2, 2) = inflation * (sigma_g * ts) * (sigma_g * ts);
    return q;
}

RangingEkf::RangingEkf(std::span<const Pose2D> initial_poses,
                       const Eigen::Vector3d& initial_variances, const EkfConfig& cfg)
    : n_(static_cast<int>(initial_poses.size())), cfg_(cfg) {
    est_.state.resize(3 * n_);
    est_.covariance = Eigen::MatrixXd::Zero(3 * n_, 3 * n_);
    for (int i = 0; i < n_; ++i) {
        est_.state(3 * i + 0) = initial_poses[i].x;
        est_.state(3 * i + 1) = initial_poses[i].y;
        est_.state(3 * i + 2) = initial_poses[i].theta;
        est_.covariance.block<3, 3>(3 * i, 3 * i) = initial_variances.asDiagonal();
    }
    est_.time_index = 0;
}

Pose2D RangingEkf::pose_of(int uav) const {
    return Pose2D{est_.state(3 * uav), est_.state(3 * uav + 1), est_.state(3 * uav + 2)};
}

std::vector<Pose2D> RangingEkf::poses() const {
    std::vector<Pose2D> out(n_);
    for (int i = 0; i < n_; ++i) out[i] = pose_of(i);
    return out;
}

Eigen::Matrix3d RangingEkf::motion_jacobian(const Pose2D& pose, const ControlMeasurement& u,
                                            double ts) {
    const double heading = pose.theta + ts * u.yaw_rate;
    Eigen::Matrix3d f = Eigen::Matrix3d::Identity();
    f(0, 2) = -ts * u.velocity * std::sin(heading);
    f(1, 2) = ts * u.velocity * std::cos(heading);
    return f;
}

void RangingEkf::predict(std::span<const ControlMeasurement> controls) {
    if (static_cast<int>(controls.size()) != n_)
        throw std::invalid_argument("predict needs one control per UAV");

    Eigen::MatrixXd f = Eigen::MatrixXd::Identity(3 * n_, 3 * n_);
    for (int i = 0; i < n_; ++i) {
        const Pose2D pose = pose_of(i);
        const Pose2D next = step_pose(pose, controls[i], cfg_.ts);
        est_.state(3 * i + 0) = next.x;
        est_.state(3 * i + 1) = next.y;
        est_.state(3 * i + 2) = next.theta;
        f.block<3, 3>(3 * i, 3 * i) = motion_jacobian(pose, controls[i], cfg_.ts);
    }
    Eigen::MatrixXd p = f * est_.covariance * f.transpose();
    for (int i = 0; i < n_; ++i) p.block<3, 3>(3 * i, 3 * i) += cfg_.process_noise;
    est_.covariance = 0.5 * (p + p.transpose());
    ++est_.time_index;
}

Eigen::VectorXd range_observation(const Eigen::VectorXd& state,
                                  std::span<const RangeMeasurement> pairs) {
    Eigen::VectorXd h(pairs.size());
    for (std::size_t row = 0; row < pairs.size(); ++row) {
        const auto& r = pairs[row];
        h(static_cast<Eigen::Index>(row)) =
            std::hypot(state(3 * r.uav_i) - state(3 * r.uav_j),
                       state(3 * r.uav_i + 1) - state(3 * r.uav_j + 1));
    }
    return h;
}

Eigen::MatrixXd range_jacobian(const Eigen::VectorXd& state,
                               std::span<const RangeMeasurement> pairs) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pairs.size()),
                                              state.size());
    for (std::size_t row = 0; row < pairs.size(); ++row) {
        const auto& r = pairs[row];
        const double dx = state(3 * r.uav_i) - state(3 * r.uav_j);
        const double dy = state(3 * r.uav_i + 1) - state(3 * r.uav_j + 1);
        const double d = std::hypot(dx, dy);
        const auto i = static_cast<Eigen::Index>(row);
        h(i, 3 * r.uav_i + 0) = dx / d;
        h(i, 3 * r.uav_i + 1) = dy / d;
        h(i, 3 * r.uav_j + 0) = -dx / d;
        h(i, 3 * r.uav_j + 1) = -dy / d;
    }
    return h;
}

int RangingEkf::update(std::span<const RangeMeasurement> ranges) {
    constexpr double kDegenerateDistance = 1e-6; // m
    std::vector<RangeMeasurement> usable;
    usable.reserve(ranges.size());
    for (const auto& r : ranges) {
        const double dx = est_.state(3 * r.uav_i) - est_.state(3 * r.uav_j);
        const double dy = est_.state(3 * r.uav_i + 1) - est_.state(3 * r.uav_j + 1);
        if (std::hypot(dx, dy) < kDegenerateDistance) {
            ++skipped_degenerate_; // range Jacobian undefined for coincident estimates
            continue;
        }
        usable.push_back(r);
    }
    const int m = static_cast<int>(usable.size());
    if (m == 0) return 0;

    const Eigen::MatrixXd h = range_jacobian(est_.state, usable);
    Eigen::VectorXd innovation(m);
    {
        const Eigen::VectorXd predicted = range_observation(est_.state, usable);
        for (int row = 0; row < m; ++row) innovation(row) = usable[row].distance - predicted(row);
    }

    const Eigen::MatrixXd r_mat =
        cfg_.ranging_variance * Eigen::MatrixXd::Identity(m, m);
    const Eigen::MatrixXd pht = est_.covariance * h.transpose();
    const Eigen::MatrixXd s = h * pht + r_mat;
    const Eigen::MatrixXd k = s.llt().solve(pht.transpose()).transpose();

    est_.state += k * innovation;
    // Joseph form keeps the covariance PSD under roundoff.
    const Eigen::MatrixXd ikh =
        Eigen::MatrixXd::Identity(3 * n_, 3 * n_) - k * h;
    Eigen::MatrixXd p = ikh * est_.covariance * ikh.transpose() + k * r_mat * k.transpose();
    est_.covariance = 0.5 * (p + p.transpose());
    return m;
}

std::vector<Pose2D> estimate_with_dead_reckoning(
    const EkfEstimate& est, std::span<const std::vector<ControlMeasurement>> steps_of_controls,
    double ts) {
    const int n = static_cast<int>(est.state.size()) / 3;
    std::vector<Pose2D> poses(n);
    for (int i = 0; i < n; ++i)
        poses[i] = Pose2D{est.state(3 * i), est.state(3 * i + 1), est.state(3 * i + 2)};
    for (const auto& step : steps_of_controls) {
        if (static_cast<int>(step.size()) != n)
            throw std::invalid_argument("each dead-reckoning step needs one control per UAV");
        for (int i = 0; i < n; ++i) poses[i] = step_pose(poses[i], step[i], ts);
    }
    return poses;
}

std::vector<std::array<double, 2>> relative_positions(std::span<const Pose2D> poses,
                                                      int self_id) {
    std::vector<std::array<double, 2>> rel(poses.size());
    const Pose2D& self = poses[self_id];
    for (std::size_t i = 0; i < poses.size(); ++i)
        rel[i] = {poses[i].x - self.x, poses[i].y - self.y};
    return rel;
}

} // namespace coopnav
