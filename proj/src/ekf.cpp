#include "relnav/ekf.hpp"

namespace relnav {

EkfState ekf_predict(const EkfState& s, const Vec3& u_accel, const OrbitParams& params) {
    EkfState out = s;
    const Vec3 accel = cw2_acceleration(s.x, params) + u_accel;
    out.x.r = s.x.r + s.x.v * s.dt;
    out.x.v = s.x.v + accel * s.dt;

    const Mat6 F = ekf_state_jacobian(s.x, params, s.dt);
    out.P = symmetrize(F * s.P * F.transpose() + s.Q);
    return out;
}

Mat6 ekf_state_jacobian(const State6& x, const OrbitParams& params, double dt) {
    Mat6 F = Mat6::Identity();
    F.topRightCorner<3, 3>() = dt * Mat3::Identity();
    const Eigen::Matrix<double, 3, 6> Ja = cw2_acceleration_jacobian(x, params);
    F.bottomLeftCorner<3, 3>() += dt * Ja.leftCols<3>();
    F.bottomRightCorner<3, 3>() += dt * Ja.rightCols<3>();
    return F;
}

Eigen::Matrix<double, 3, 6> ekf_measurement_jacobian(const State6& x) {
    const double r = x.r.norm();
    if (!(r > 0.0)) {
        throw Error("zero_position", "measurement Jacobian undefined at zero range");
    }
    Eigen::Matrix<double, 3, 6> H = Eigen::Matrix<double, 3, 6>::Zero();
    H.leftCols<3>() = (Mat3::Identity() - x.r * x.r.transpose() / (r * r)) / r;
    return H;
}

EkfState ekf_update(const EkfState& s, const Vec3& y_los) {
    const double r = s.x.r.norm();
    if (!(r > 0.0)) {
        throw Error("zero_position", "predicted range is zero; update undefined");
    }
    const Eigen::Matrix<double, 3, 6> H = ekf_measurement_jacobian(s.x);
    const Vec3 y_pred = s.x.r / r;

    const Mat3 innov_cov = H * s.P * H.transpose() + s.R;
    const Mat63 gain = s.P * H.transpose() * innov_cov.inverse();

    EkfState out = s;
    const Vec6 correction = gain * (y_los - y_pred);
    out.x.r = s.x.r + correction.head<3>();
    out.x.v = s.x.v + correction.tail<3>();

    const Mat6 IKH = Mat6::Identity() - gain * H;
    out.P = symmetrize(IKH * s.P * IKH.transpose() + gain * s.R * gain.transpose());
    return out;
}

EkfState ekf_initialize_from_irod(const State6& x0_hat, const Mat6& P0,
                                  const ImpulseSequence& u_applied, double t_handover,
                                  const Mat6& Q_step, const Mat3& R, double dt,
                                  const OrbitParams& params) {
    EkfState s;
    s.x = propagate_linear(x0_hat, u_applied, t_handover, params);
    // Per-step noise as a rate over the handover gap.
    const Mat6 q_rate = (dt > 0.0) ? Mat6(Q_step / dt) : Q_step;
    const double riemann = std::max(t_handover / 100.0, 1e-3);
    s.P = (t_handover > 0.0)
              ? propagate_covariance(P0, t_handover, q_rate, params, riemann)
              : symmetrize(P0);
    s.Q = Q_step;
    s.R = R;
    s.dt = dt;
    return s;
}

}  // namespace relnav
