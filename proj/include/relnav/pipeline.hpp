#ifndef RELNAV_PIPELINE_HPP
#define RELNAV_PIPELINE_HPP

#include <memory>
#include <optional>
#include <vector>

#include "relnav/scenario.hpp"

namespace relnav {

/// Ground-truth interface; estimators never see it.
class TruthModel {
public:
    virtual ~TruthModel() = default;
    virtual State6 relative_state() const = 0;
    virtual void apply_impulse(const Vec3& dv) = 0;
    virtual void advance(double dt, const Vec3& lvlh_accel = Vec3::Zero()) = 0;
    virtual double time() const = 0;
};

std::unique_ptr<TruthModel> make_truth_model(const Scenario& sc);

struct Stage1Record {
    int k = 0;
    double t = 0.0;
    Vec6 truth = Vec6::Zero();  ///< metric only
    Vec3 los = Vec3::Zero();
    Vec3 u = Vec3::Zero();  ///< impulse applied at this epoch (after the measurement)
    bool estimate_valid = false;
    Vec6 x0_hat = Vec6::Zero();
    double err_norm = 0.0;  ///< metric only
    double lam_max_pos = 0.0;
    double lam_max_vel = 0.0;
    double kappa = 0.0;
    double cond_A = 0.0;
    double residual = 0.0;
    bool transitioned = false;
};

struct Stage2Record {
    double t = 0.0;
    Vec6 truth = Vec6::Zero();  ///< metric only
    Vec6 estimate = Vec6::Zero();
    Vec6 p_diag = Vec6::Zero();
    Vec3 u = Vec3::Zero();  ///< applied per-step impulse [m/s]
    int mpc_status = 0;     ///< 0 optimal, 1 fallback
    double nees = 0.0;      ///< metric only
};

struct RunResult {
    std::vector<Stage1Record> stage1;
    std::vector<LosMeasurement> measurements;
    std::vector<Mat6> p0_history;  ///< per valid estimate, same order as records
    std::vector<Stage2Record> stage2;

    int transition_k = -1;
    int n_measurements = 0;
    double t_handover = 0.0;
    bool no_transition = false;
    bool stage2_ran = false;

    double rmae_percent = 0.0;
    bool rmae_valid = false;
    double terminal_pos_err = 0.0;
    double terminal_vel_err = 0.0;
    double reach_time = -1.0;  ///< first time truth errors entered the terminal box

    double wall_stage1_s = 0.0;
    double wall_stage2_s = 0.0;
};

struct RmaeMetric {
    double value_percent = 0.0;
    int first_epoch = 0;
    int n_terms = 0;
};

/// Relative mean absolute error of the initial-state estimates from epoch
/// n_i on, normalized by the initial along-track distance.
RmaeMetric rmae(const std::vector<std::pair<int, Vec6>>& estimates, const State6& x0_true,
                int n_i);

/// Stage 1 (batch estimation with designed inputs, covariance transition
/// test) followed, in full mode, by the recursive filter + controller loop.
RunResult run_pipeline(const Scenario& sc, const InputPlan& plan, std::uint64_t run_seed);

}  // namespace relnav

#endif
