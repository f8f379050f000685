#ifndef RELNAV_MPC_HPP
#define RELNAV_MPC_HPP

#include <optional>
#include <vector>

#include "relnav/core.hpp"
#include "relnav/dynamics.hpp"

namespace relnav {

/// Constraint tightening tier; active when the current range falls below the
/// trigger. Tiers compose by taking the tightest applicable bound.
struct AdaptiveTier {
    double range_trigger = 0.0;  ///< [m]
    double u_max = 0.0;          ///< [m/s per step]
    double r_max = 0.0;          ///< [m]
    double v_max = 0.0;          ///< [m/s]
};

struct MpcConfig {
    int horizon = 30;
    double dt = 1.0;
    double w_pos = 10.0;
    double w_vel = 0.0;
    double w_u = 0.01;
    double w_term = 100.0;
    double u_max = 0.12;    ///< per-step impulse bound [m/s]
    double r_max = 1.2e4;   ///< position box [m]
    double v_max = 5.5;     ///< velocity box [m/s]
    double tol = 1e-8;
    int max_iters = 4000;
    double kp = 0.01;  ///< fallback proportional gain [1/s^2]
    double kd = 0.2;   ///< fallback derivative gain [1/s]
    std::vector<AdaptiveTier> tiers;

    void validate() const;
};

enum class MpcStatus { Optimal, Fallback };

struct MpcSolution {
    std::vector<Vec3> u_plan;        ///< length H
    std::vector<State6> predicted;   ///< length H+1
    double objective = 0.0;
    MpcStatus status = MpcStatus::Optimal;
};

/// Finite-horizon tracking problem to the origin on the discrete model, with
/// per-step impulse and state boxes. Solved via operator splitting with an
/// active-set polish; falls back to the PD law when the solver fails.
MpcSolution solve_mpc(const State6& x_hat, const MpcConfig& cfg, const OrbitParams& params,
                      const std::vector<Vec3>* warm_start = nullptr);

/// Saturated PD law, per-axis clamp.
Vec3 pd_fallback(const State6& x_hat, double kp, double kd, double u_max);

/// Piecewise constraint tightening by current range; never loosens as range
/// decreases.
MpcConfig adapt_config(double range, const MpcConfig& base);

}  // namespace relnav

#endif
