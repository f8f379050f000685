#ifndef RELNAV_EKF_HPP
#define RELNAV_EKF_HPP

#include "relnav/core.hpp"
#include "relnav/covariance.hpp"
#include "relnav/dynamics.hpp"

namespace relnav {

/// Recursive filter state on the second-order relative dynamics.
struct EkfState {
    State6 x;
    Mat6 P = Mat6::Zero();
    Mat6 Q = Mat6::Zero();  ///< per-step process noise
    Mat3 R = Mat3::Zero();  ///< measurement noise
    double dt = 1.0;        ///< filter step [s]
};

/// Euler time update: position from the prior velocity, velocity from the
/// quadratic-model acceleration plus the thrust acceleration u [m/s^2].
EkfState ekf_predict(const EkfState& s, const Vec3& u_accel, const OrbitParams& params);

/// Jacobian of the discrete state map used by ekf_predict (quadratic terms
/// included).
Mat6 ekf_state_jacobian(const State6& x, const OrbitParams& params, double dt);

/// Direction-only measurement update in Joseph form. Faults on a zero
/// predicted range.
EkfState ekf_update(const EkfState& s, const Vec3& y_los);

/// Measurement Jacobian at a state: [(1/r)(I - rr^T/r^2)  0].
Eigen::Matrix<double, 3, 6> ekf_measurement_jacobian(const State6& x);

/// Batch-to-recursive handover: propagate the batch estimate through the
/// applied impulses and its covariance (with integrated process noise) to
/// t_handover, and install the pair as the filter prior.
EkfState ekf_initialize_from_irod(const State6& x0_hat, const Mat6& P0,
                                  const ImpulseSequence& u_applied, double t_handover,
                                  const Mat6& Q_step, const Mat3& R, double dt,
                                  const OrbitParams& params);

}  // namespace relnav

#endif
