#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "coopnav/geometry.hpp"

namespace coopnav {

/// Tuning of the cooperative ranging EKF.
struct EkfConfig {
    Eigen::Matrix3d process_noise = Eigen::Matrix3d::Zero(); // per-UAV block of Q, per step
    double ranging_variance = 1.0;                           // sigma_r^2, m^2
    double ts = 0.2;                                         // filter period, s
};

/// Default per-UAV process noise block: diag(sigma_v^2 Ts^2, sigma_v^2 Ts^2,
/// (sigma_g Ts)^2), inflated to absorb the unmodeled turn-on biases.
Eigen::Matrix3d default_process_noise(double sigma_v, double sigma_g, double ts,
                                      double inflation = 2.0);

/// Stacked 3N-dimensional pose estimate [pi^(1) ... pi^(N)] with covariance.
struct EkfEstimate {
    Eigen::VectorXd state;      // 3N
    Eigen::MatrixXd covariance; // 3N x 3N, symmetric PSD
    std::int64_t time_index = 0;
};

struct RangeMeasurement {
    int uav_i = 0;
    int uav_j = 0;
    double distance = 0.0; // m
};

/// Predicted pairwise distances h(x) for a stacked state.
Eigen::VectorXd range_observation(const Eigen::VectorXd& state,
                                  std::span<const RangeMeasurement> pairs);

/// Analytic Jacobian of range_observation; heading columns are zero.
Eigen::MatrixXd range_jacobian(const Eigen::VectorXd& state,
                               std::span<const RangeMeasurement> pairs);

/// Cooperative ranging localization: dead-reckoning prediction of all N
/// poses plus batched range updates over the step's edge set. Range
/// measurements carry no absolute position or heading information, so only
/// the group's geometric structure is maintained.
class RangingEkf {
public:
    RangingEkf(std::span<const Pose2D> initial_poses, const Eigen::Vector3d& initial_variances,
               const EkfConfig& cfg);

    int n_uavs() const { return n_; }
    const EkfEstimate& estimate() const { return est_; }

    Pose2D pose_of(int uav) const;
    std::vector<Pose2D> poses() const;

    /// Advance every pose block one step with that UAV's measured controls;
    /// covariance becomes F P F^T + Q with F the block-diagonal motion
    /// Jacobian. Headings are re-wrapped.
    void predict(std::span<const ControlMeasurement> controls);

    /// Batched EKF update with one range per pair, R = ranging_variance * I,
    /// Joseph-form covariance update plus re-symmetrization. Pairs whose
    /// estimated separation is below 1e-6 m have an undefined Jacobian and
    /// are skipped; the return value is the number of pairs actually used.
    int update(std::span<const RangeMeasurement> ranges);

    /// Jacobian of the discrete motion step w.r.t. the pose.
    static Eigen::Matrix3d motion_jacobian(const Pose2D& pose, const ControlMeasurement& u,
                                           double ts);

    int skipped_degenerate_pairs() const { return skipped_degenerate_; }

private:
    int n_;
    EkfConfig cfg_;
    EkfEstimate est_;
    int skipped_degenerate_ = 0;
};

/// Dead-reckoning extension of a stacked estimate: iterate the motion step
/// on each pose block with the supplied per-step controls
/// (steps_of_controls[t] holds all N controls of step t). Returns the poses
/// only; the covariance is left behind at the estimate's own step.
std::vector<Pose2D> estimate_with_dead_reckoning(
    const EkfEstimate& est, std::span<const std::vector<ControlMeasurement>> steps_of_controls,
    double ts);

/// Componentwise relative positions (x_i - x_j, y_i - y_j) of every UAV
/// with respect to self_id.
std::vector<std::array<double, 2>> relative_positions(std::span<const Pose2D> poses, int self_id);

} // namespace coopnav
