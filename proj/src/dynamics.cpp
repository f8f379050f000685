#include "relnav/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace relnav {

OrbitParams OrbitParams::from_mu_a(double mu, double a) {
    OrbitParams p;
    p.mu = mu;
    p.a = a;
    p.n = std::sqrt(mu / (a * a * a));
    p.validate();
    return p;
}

void OrbitParams::validate() const {
    // mu == 0 admitted as the degenerate free-drift case (n = 0).
    if (!(mu >= 0.0) || !(a > 0.0)) {
        throw Error("invalid_orbit", "orbit parameters require mu >= 0 and a > 0");
    }
    const double n_ref = std::sqrt(mu / (a * a * a));
    if (std::abs(n - n_ref) > 1e-12 * n_ref) {
        throw Error("invalid_orbit", "mean motion inconsistent with mu and a");
    }
}

void ImpulseSequence::validate() const {
    int last = 0;
    for (const auto& imp : impulses) {
        if (imp.index < 1 || imp.index <= last) {
            throw Error("invalid_impulses", "impulse indices must be strictly increasing and >= 1");
        }
        if (!imp.dv.allFinite()) {
            throw Error("invalid_impulses", "impulse amplitude not finite");
        }
        last = imp.index;
    }
}

Mat6 StmSet::full() const {
    Mat6 m;
    m.topLeftCorner<3, 3>() = rr;
    m.topRightCorner<3, 3>() = rv;
    m.bottomLeftCorner<3, 3>() = vr;
    m.bottomRightCorner<3, 3>() = vv;
    return m;
}

std::pair<Mat6, Mat63> cw_system_matrices(const OrbitParams& params) {
    params.validate();
    const double n = params.n;
    Mat6 A = Mat6::Zero();
    A.topRightCorner<3, 3>() = Mat3::Identity();
    // z radial / y cross-track / x along-track convention.
    A(4, 1) = -n * n;
    A(5, 2) = 3.0 * n * n;
    A(3, 5) = -2.0 * n;
    A(5, 3) = 2.0 * n;
    Mat63 B = Mat63::Zero();
    B.bottomRows<3>() = Mat3::Identity();
    return {A, B};
}

StmSet cw_stm(double dt, const OrbitParams& params) {
    const double n = params.n;
    StmSet stm;
    stm.dt = dt;
    if (n == 0.0) {
        // Free-drift limit.
        stm.rr = Mat3::Identity();
        stm.rv = dt * Mat3::Identity();
        stm.vr = Mat3::Zero();
        stm.vv = Mat3::Identity();
        return stm;
    }
    const double nt = n * dt;
    const double s = std::sin(nt);
    const double c = std::cos(nt);

    Mat3& rr = stm.rr;
    Mat3& rv = stm.rv;
    Mat3& vr = stm.vr;
    Mat3& vv = stm.vv;
    rr.setZero();
    rv.setZero();
    vr.setZero();
    vv.setZero();

    rr(0, 0) = 1.0;
    rr(0, 2) = 6.0 * (s - nt);
    rr(1, 1) = c;
    rr(2, 2) = 4.0 - 3.0 * c;

    rv(0, 0) = (4.0 * s - 3.0 * nt) / n;
    rv(0, 2) = 2.0 * (c - 1.0) / n;
    rv(1, 1) = s / n;
    rv(2, 0) = 2.0 * (1.0 - c) / n;
    rv(2, 2) = s / n;

    vr(0, 2) = 6.0 * n * (c - 1.0);
    vr(1, 1) = -n * s;
    vr(2, 2) = 3.0 * n * s;

    vv(0, 0) = 4.0 * c - 3.0;
    vv(0, 2) = -2.0 * s;
    vv(1, 1) = c;
    vv(2, 0) = 2.0 * s;
    vv(2, 2) = c;

    return stm;
}

State6 propagate_linear(const State6& x0, const ImpulseSequence& u, double t,
                        const OrbitParams& params) {
    u.validate();
    const StmSet stm = cw_stm(t, params);
    Vec3 r = stm.rr * x0.r + stm.rv * x0.v;
    Vec3 v = stm.vr * x0.r + stm.vv * x0.v;
    for (const auto& imp : u.impulses) {
        const double tj = imp.index * u.period;
        if (tj <= t) {
            const StmSet resp = cw_stm(t - tj, params);
            r += resp.rv * imp.dv;
            v += resp.vv * imp.dv;
        }
    }
    return State6{r, v};
}

std::pair<Mat6, Mat63> discretize_semi_implicit(const OrbitParams& params, double dt) {
    if (!(dt > 0.0)) {
        throw Error("invalid_step", "discretization step must be positive");
    }
    auto [A, B] = cw_system_matrices(params);
    const Mat3 Avr = A.bottomLeftCorner<3, 3>();
    const Mat3 Avv = A.bottomRightCorner<3, 3>();

    Mat6 Ad;
    Ad.topLeftCorner<3, 3>() = Mat3::Identity() + dt * dt * Avr;
    Ad.topRightCorner<3, 3>() = dt * (Mat3::Identity() + dt * Avv);
    Ad.bottomLeftCorner<3, 3>() = dt * Avr;
    Ad.bottomRightCorner<3, 3>() = Mat3::Identity() + dt * Avv;

    Mat63 Bd;
    Bd.topRows<3>() = dt * Mat3::Identity();
    Bd.bottomRows<3>() = Mat3::Identity();
    return {Ad, Bd};
}

Vec3 cw2_acceleration(const State6& x, const OrbitParams& params) {
    const double n = params.n;
    const double c = n * n / params.a;
    const double px = x.r[0], py = x.r[1], pz = x.r[2];
    const double vx = x.v[0], vz = x.v[2];
    Vec3 a;
    a[0] = -2.0 * n * vz + 3.0 * c * px * pz;
    a[1] = -n * n * py + 3.0 * c * py * pz;
    a[2] = 2.0 * n * vx + 3.0 * n * n * pz + c * (px * px + py * py - 2.0 * pz * pz);
    return a;
}

Eigen::Matrix<double, 3, 6> cw2_acceleration_jacobian(const State6& x, const OrbitParams& params) {
    const double n = params.n;
    const double c = n * n / params.a;
    const double px = x.r[0], py = x.r[1], pz = x.r[2];
    Eigen::Matrix<double, 3, 6> J = Eigen::Matrix<double, 3, 6>::Zero();
    J(0, 0) = 3.0 * c * pz;
    J(0, 2) = 3.0 * c * px;
    J(0, 5) = -2.0 * n;
    J(1, 1) = -n * n + 3.0 * c * pz;
    J(1, 2) = 3.0 * c * py;
    J(2, 0) = 2.0 * c * px;
    J(2, 1) = 2.0 * c * py;
    J(2, 2) = 3.0 * n * n - 4.0 * c * pz;
    J(2, 3) = 2.0 * n;
    return J;
}

namespace {

/// Orthonormal LVLH triad rows (inertial -> LVLH rotation) and frame angular
/// velocity in inertial coordinates.
void lvlh_frame(const InertialState& target, Mat3& rot, Vec3& omega) {
    const double rnorm = target.r.norm();
    const Vec3 h = target.r.cross(target.v);
    const double hnorm = h.norm();
    if (rnorm <= 0.0 || hnorm <= 1e-12) {
        throw Error("degenerate_orbit", "LVLH frame undefined: zero radius or angular momentum");
    }
    const Vec3 z_hat = target.r / rnorm;
    const Vec3 y_hat = h / hnorm;
    const Vec3 x_hat = y_hat.cross(z_hat);
    rot.row(0) = x_hat;
    rot.row(1) = y_hat;
    rot.row(2) = z_hat;
    omega = h / (rnorm * rnorm);
}

}  // namespace

State6 lvlh_from_inertial(const InertialState& target, const InertialState& chaser) {
    Mat3 rot;
    Vec3 omega;
    lvlh_frame(target, rot, omega);
    const Vec3 dr = chaser.r - target.r;
    const Vec3 dv = chaser.v - target.v;
    State6 rel;
    rel.r = rot * dr;
    rel.v = rot * (dv - omega.cross(dr));
    return rel;
}

InertialState chaser_from_lvlh(const InertialState& target, const State6& rel) {
    Mat3 rot;
    Vec3 omega;
    lvlh_frame(target, rot, omega);
    const Vec3 dr = rot.transpose() * rel.r;
    const Vec3 dv = rot.transpose() * rel.v + omega.cross(dr);
    return InertialState{target.r + dr, target.v + dv};
}

InertialState inertial_from_elements(const OrbitalElements& el, double mu) {
    const double p = el.a * (1.0 - el.e * el.e);
    const double r = p / (1.0 + el.e * std::cos(el.nu));
    const Vec3 r_pf(r * std::cos(el.nu), r * std::sin(el.nu), 0.0);
    const double vscale = std::sqrt(mu / p);
    const Vec3 v_pf(-vscale * std::sin(el.nu), vscale * (el.e + std::cos(el.nu)), 0.0);

    const Eigen::AngleAxisd R3_raan(el.raan, Vec3::UnitZ());
    const Eigen::AngleAxisd R1_inc(el.inc, Vec3::UnitX());
    const Eigen::AngleAxisd R3_argp(el.argp, Vec3::UnitZ());
    const Mat3 rot = (R3_raan * R1_inc * R3_argp).toRotationMatrix();
    return InertialState{rot * r_pf, rot * v_pf};
}

TwoBodySim::TwoBodySim(const InertialState& target, const InertialState& chaser,
                       const OrbitParams& params, double max_step)
    : target_(target), chaser_(chaser), mu_(params.mu), max_step_(max_step) {
    if (!(max_step > 0.0)) {
        throw Error("invalid_step", "truth propagation step must be positive");
    }
    if (target.r.norm() < kEarthRadius || chaser.r.norm() < kEarthRadius) {
        throw Error("below_earth", "initial state below Earth radius");
    }
}

void TwoBodySim::apply_lvlh_impulse(const Vec3& dv) {
    Mat3 rot;
    Vec3 omega;
    lvlh_frame(target_, rot, omega);
    chaser_.v += rot.transpose() * dv;
}

void TwoBodySim::advance(double dt, const Vec3& lvlh_accel) {
    double remaining = dt;
    while (remaining > 1e-12) {
        const double h = std::min(remaining, max_step_);
        rk4_step(h, lvlh_accel);
        remaining -= h;
        if (target_.r.norm() < kEarthRadius || chaser_.r.norm() < kEarthRadius) {
            throw Error("below_earth", "trajectory descended below Earth radius");
        }
    }
    t_ += dt;
}

void TwoBodySim::rk4_step(double h, const Vec3& lvlh_accel) {
    // y = [rt, vt, rc, vc]
    using Vec12 = Eigen::Matrix<double, 12, 1>;
    Vec12 y;
    y << target_.r, target_.v, chaser_.r, chaser_.v;

    const double mu = mu_;
    auto deriv = [mu, &lvlh_accel](const Vec12& s) -> Vec12 {
        const Vec3 rt = s.segment<3>(0);
        const Vec3 vt = s.segment<3>(3);
        const Vec3 rc = s.segment<3>(6);
        const Vec3 vc = s.segment<3>(9);
        const Vec3 at = -mu / std::pow(rt.norm(), 3) * rt;
        Vec3 ac = -mu / std::pow(rc.norm(), 3) * rc;
        if (!lvlh_accel.isZero()) {
            Mat3 rot;
            Vec3 omega;
            lvlh_frame(InertialState{rt, vt}, rot, omega);
            ac += rot.transpose() * lvlh_accel;
        }
        Vec12 d;
        d << vt, at, vc, ac;
        return d;
    };

    const Vec12 k1 = deriv(y);
    const Vec12 k2 = deriv(y + 0.5 * h * k1);
    const Vec12 k3 = deriv(y + 0.5 * h * k2);
    const Vec12 k4 = deriv(y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    target_.r = y.segment<3>(0);
    target_.v = y.segment<3>(3);
    chaser_.r = y.segment<3>(6);
    chaser_.v = y.segment<3>(9);
}

double TwoBodySim::specific_energy_target() const {
    return 0.5 * target_.v.squaredNorm() - mu_ / target_.r.norm();
}

double TwoBodySim::specific_energy_chaser() const {
    return 0.5 * chaser_.v.squaredNorm() - mu_ / chaser_.r.norm();
}

std::vector<TruthSample> truth_propagate(const InertialState& target,
                                         const InertialState& chaser,
                                         const ImpulseSequence& u, double horizon,
                                         double step, const OrbitParams& params) {
    if (!(step > 0.0) || step > 1.0) {
        throw Error("invalid_step", "truth propagation requires 0 < step <= 1 s");
    }
    u.validate();
    TwoBodySim sim(target, chaser, params, step);

    std::vector<TruthSample> out;
    out.push_back({0.0, sim.relative_lvlh()});

    const long n_samples = std::lround(std::ceil(horizon / step - 1e-9));
    std::size_t next_impulse = 0;
    double t = 0.0;
    for (long i = 1; i <= n_samples; ++i) {
        const double t_sample = std::min(static_cast<double>(i) * step, horizon);
        // Impulse events inside (t, t_sample]; a sample recorded at an impulse
        // epoch is post-jump, matching the superposition convention.
        while (next_impulse < u.impulses.size()) {
            const double tj = u.impulses[next_impulse].index * u.period;
            if (tj > t_sample + 1e-9) break;
            if (tj > t + 1e-12) {
                sim.advance(tj - t);
                t = tj;
            }
            sim.apply_lvlh_impulse(u.impulses[next_impulse].dv);
            ++next_impulse;
        }
        if (t_sample > t + 1e-12) {
            sim.advance(t_sample - t);
            t = t_sample;
        }
        out.push_back({t, sim.relative_lvlh()});
    }
    return out;
}

}  // namespace relnav
