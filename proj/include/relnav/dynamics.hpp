#ifndef RELNAV_DYNAMICS_HPP
#define RELNAV_DYNAMICS_HPP

#include <utility>
#include <vector>

#include "relnav/core.hpp"

namespace relnav {

/// Circular reference orbit of the target spacecraft.
/// Axis convention throughout: LVLH with z radial (along the target position
/// vector), y along the orbital angular momentum, x completing the triad
/// (along-track, +V-bar).
struct OrbitParams {
    double mu = 0.0;  ///< gravitational parameter [m^3/s^2]
    double a = 0.0;   ///< reference semi-major axis [m]
    double n = 0.0;   ///< mean motion sqrt(mu/a^3) [rad/s]

    static OrbitParams from_mu_a(double mu, double a);
    void validate() const;
};

/// Relative position/velocity in the LVLH frame, SI units.
struct State6 {
    Vec3 r = Vec3::Zero();
    Vec3 v = Vec3::Zero();

    Vec6 vec() const {
        Vec6 x;
        x << r, v;
        return x;
    }
    static State6 from_vec(const Vec6& x) { return State6{x.head<3>(), x.tail<3>()}; }
};

/// 3x3 blocks of the relative-motion state transition matrix at elapsed
/// time dt (negative dt allowed; same closed form).
struct StmSet {
    Mat3 rr, rv, vr, vv;
    double dt = 0.0;

    Mat6 full() const;
};

/// Velocity impulse applied at epoch t0 + index*period, strictly after the
/// measurement taken at that epoch.
struct Impulse {
    int index = 0;  ///< j >= 1
    Vec3 dv = Vec3::Zero();  ///< [m/s]
};

struct ImpulseSequence {
    double period = 0.0;  ///< T [s]
    std::vector<Impulse> impulses;  ///< indices strictly increasing

    void validate() const;
};

/// Earth-centered inertial position/velocity of one spacecraft.
struct InertialState {
    Vec3 r = Vec3::Zero();  ///< [m]
    Vec3 v = Vec3::Zero();  ///< [m/s]
};

/// Classical orbital elements (angles in radians).
struct OrbitalElements {
    double a = 0.0;
    double e = 0.0;
    double inc = 0.0;
    double raan = 0.0;
    double argp = 0.0;
    double nu = 0.0;
};

double constexpr kEarthRadius = 6.378137e6;     // [m]
double constexpr kEarthMu = 3.986004418e14;     // [m^3/s^2]

/// Continuous-time relative dynamics: xdot = A x + B u.
std::pair<Mat6, Mat63> cw_system_matrices(const OrbitParams& params);

/// Closed-form state transition matrix blocks at elapsed time dt.
StmSet cw_stm(double dt, const OrbitParams& params);

/// State at time t under the impulsive superposition solution. Impulses with
/// index*period <= t contribute (an impulse exactly at t adds only its
/// velocity jump).
State6 propagate_linear(const State6& x0, const ImpulseSequence& u, double t,
                        const OrbitParams& params);

/// Semi-implicit Euler discretization; u enters as a per-step velocity
/// impulse (Bd = [dt*I; I]).
std::pair<Mat6, Mat63> discretize_semi_implicit(const OrbitParams& params, double dt);

/// Relative acceleration including the quadratic curvature terms with
/// c = n^2/a.
Vec3 cw2_acceleration(const State6& x, const OrbitParams& params);

/// Jacobian of cw2_acceleration with respect to the 6-state.
Eigen::Matrix<double, 3, 6> cw2_acceleration_jacobian(const State6& x, const OrbitParams& params);

/// LVLH relative state of the chaser with respect to the target, velocity
/// corrected for the rotating frame.
State6 lvlh_from_inertial(const InertialState& target, const InertialState& chaser);

/// Inverse placement: inertial chaser state realizing a given LVLH relative
/// state about the target.
InertialState chaser_from_lvlh(const InertialState& target, const State6& rel);

InertialState inertial_from_elements(const OrbitalElements& el, double mu);

/// Two-body truth simulator with RK4 stepping, impulsive velocity jumps and
/// piecewise-constant LVLH thrust acceleration on the chaser.
class TwoBodySim {
public:
    TwoBodySim(const InertialState& target, const InertialState& chaser,
               const OrbitParams& params, double max_step = 1.0);

    /// Instantaneous chaser velocity jump given in current LVLH axes.
    void apply_lvlh_impulse(const Vec3& dv);

    /// Advance both spacecraft by dt; accel is a constant chaser thrust
    /// acceleration expressed in (instantaneous) LVLH axes.
    void advance(double dt, const Vec3& lvlh_accel = Vec3::Zero());

    State6 relative_lvlh() const { return lvlh_from_inertial(target_, chaser_); }
    double time() const { return t_; }
    const InertialState& target() const { return target_; }
    const InertialState& chaser() const { return chaser_; }

    double specific_energy_target() const;
    double specific_energy_chaser() const;
    Vec3 angular_momentum_target() const { return target_.r.cross(target_.v); }
    Vec3 angular_momentum_chaser() const { return chaser_.r.cross(chaser_.v); }

private:
    void rk4_step(double h, const Vec3& lvlh_accel);

    InertialState target_;
    InertialState chaser_;
    double mu_;
    double max_step_;
    double t_ = 0.0;
};

struct TruthSample {
    double t = 0.0;
    State6 lvlh;
};

/// Ground-truth relative trajectory under two-body gravity; impulses are
/// chaser velocity jumps in LVLH axes at t = index*period. Samples every
/// `step` seconds including both endpoints.
std::vector<TruthSample> truth_propagate(const InertialState& target,
                                         const InertialState& chaser,
                                         const ImpulseSequence& u, double horizon,
                                         double step, const OrbitParams& params);

}  // namespace relnav

#endif
