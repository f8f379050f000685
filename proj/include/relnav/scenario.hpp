#ifndef RELNAV_SCENARIO_HPP
#define RELNAV_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "relnav/covariance.hpp"
#include "relnav/dynamics.hpp"
#include "relnav/ekf.hpp"
#include "relnav/input_design.hpp"
#include "relnav/mpc.hpp"

namespace relnav {

enum class TruthKind { Linear, Keplerian };
enum class PipelineMode { Full, IrodOnly };

struct EkfConfig {
    double dt = 1.0;        ///< [s]
    double q_pos = 1e-10;   ///< per-step position noise [m^2]
    double q_vel = 1e-12;   ///< per-step velocity noise [m^2/s^2]
    double r_factor = 500.0;  ///< isotropic inflation of sigma_theta^2
    bool tangent_r = false;   ///< use the tangent-plane measurement covariance

    Mat6 q_matrix() const;
    Mat3 r_matrix(double sigma_theta, const Vec3& predicted_los) const;
};

/// Full experiment description; JSON round-trippable.
struct Scenario {
    int schema_version = 1;
    std::string name = "scenario";

    double mu = kEarthMu;
    double a = 6.7901e6;
    OrbitalElements elements;  ///< target orbit (a taken from `a`)

    TruthKind truth = TruthKind::Keplerian;
    PipelineMode mode = PipelineMode::Full;

    State6 x0_true;
    State6 x0_nominal;

    double T = 600.0;  ///< epoch spacing [s]
    int n_max = 20;    ///< stage-1 epochs beyond the first measurement
    int n_off = 10;
    double sigma_theta = 1e-4;  ///< [rad]

    // Offline design settings; samples are along-track offsets about the
    // nominal hold point. The acceleration bound converts to a per-step
    // impulse bound of u_abs_max_accel * T.
    double design_gamma = 1e9;
    double design_rho = 1e8;
    double design_tau = 1e-2;
    double design_epsilon = 1e-12;
    Vec6 design_q_diag = (Vec6() << 250, 25, 25, 1, 1, 1).finished();
    double design_u_abs_max_accel = 1e-4;  ///< [m/s^2]
    std::vector<double> design_sample_offsets = {-200.0, -100.0, 0.0, 100.0, 200.0};
    int pso_swarm = 100;
    int pso_iters = 100;

    TransitionThresholds thresholds{2000.0, 0.005};
    EkfConfig ekf;
    MpcConfig mpc;
    double stage2_t_max = 5000.0;  ///< absolute scenario time cap [s]
    int mc_runs = 100;
    std::uint64_t seed = 1;

    OrbitParams orbit_params() const { return OrbitParams::from_mu_a(mu, a); }
    DesignConfig design_config() const;
    void validate() const;
};

/// Braking-consistent velocity tightening table: tier steps small enough
/// that one control step can always shed the difference when crossing
/// inward.
std::vector<AdaptiveTier> braking_tiers(double u_max_outer, double u_max_inner,
                                        double inner_trigger, double v_cruise,
                                        double v_floor, double decel, double r_max);

Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& sc);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& sc, const std::string& path);

/// The reference experiment: near-circular LEO target, V-bar hold at
/// 4850 m true / 5000 m nominal, 600 s epochs.
Scenario default_scenario();

/// Reduced optimizer/campaign effort for desk-scale runs.
void apply_desk_profile(Scenario& sc);

InputPlan plan_from_json_text(const std::string& text);
std::string plan_to_json_text(const InputPlan& plan);
InputPlan load_plan(const std::string& path);
void save_plan(const InputPlan& plan, const std::string& path);

}  // namespace relnav

#endif
