#include "relnav/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "relnav/irod.hpp"

namespace relnav {

namespace {

class LinearTruth final : public TruthModel {
public:
    LinearTruth(const State6& x0, const OrbitParams& params) : x_(x0), params_(params) {}

    State6 relative_state() const override { return x_; }

    void apply_impulse(const Vec3& dv) override { x_.v += dv; }

    void advance(double dt, const Vec3& lvlh_accel) override {
        if (lvlh_accel.isZero()) {
            const StmSet stm = cw_stm(dt, params_);
            const Vec3 r = stm.rr * x_.r + stm.rv * x_.v;
            const Vec3 v = stm.vr * x_.r + stm.vv * x_.v;
            x_ = State6{r, v};
        } else {
            // RK4 on the forced linear model.
            const auto [A, B] = cw_system_matrices(params_);
            double remaining = dt;
            while (remaining > 1e-12) {
                const double h = std::min(remaining, 1.0);
                const Vec6 x0 = x_.vec();
                auto f = [&](const Vec6& x) -> Vec6 { return A * x + B * lvlh_accel; };
                const Vec6 k1 = f(x0);
                const Vec6 k2 = f(x0 + 0.5 * h * k1);
                const Vec6 k3 = f(x0 + 0.5 * h * k2);
                const Vec6 k4 = f(x0 + h * k3);
                x_ = State6::from_vec(x0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
                remaining -= h;
            }
        }
        t_ += dt;
    }

    double time() const override { return t_; }

private:
    State6 x_;
    OrbitParams params_;
    double t_ = 0.0;
};

class KeplerTruth final : public TruthModel {
public:
    KeplerTruth(const Scenario& sc)
        : sim_(inertial_from_elements(sc.elements, sc.mu),
               chaser_from_lvlh(inertial_from_elements(sc.elements, sc.mu), sc.x0_true),
               sc.orbit_params(), 1.0) {}

    State6 relative_state() const override { return sim_.relative_lvlh(); }
    void apply_impulse(const Vec3& dv) override { sim_.apply_lvlh_impulse(dv); }
    void advance(double dt, const Vec3& lvlh_accel) override { sim_.advance(dt, lvlh_accel); }
    double time() const override { return sim_.time(); }

private:
    TwoBodySim sim_;
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::unique_ptr<TruthModel> make_truth_model(const Scenario& sc) {
    if (sc.truth == TruthKind::Linear) {
        return std::make_unique<LinearTruth>(sc.x0_true, sc.orbit_params());
    }
    return std::make_unique<KeplerTruth>(sc);
}

RmaeMetric rmae(const std::vector<std::pair<int, Vec6>>& estimates, const State6& x0_true,
                int n_i) {
    const double x0_scale = std::abs(x0_true.r[0]);
    if (!(x0_scale > 0.0)) {
        throw Error("invalid_metric", "RMAE undefined for zero initial along-track distance");
    }
    RmaeMetric m;
    m.first_epoch = n_i;
    double sum = 0.0;
    for (const auto& [k, x0_hat] : estimates) {
        if (k < n_i) continue;
        sum += (x0_hat - x0_true.vec()).norm() / x0_scale;
        ++m.n_terms;
    }
    if (m.n_terms > 0) m.value_percent = 100.0 * sum / m.n_terms;
    return m;
}

RunResult run_pipeline(const Scenario& sc, const InputPlan& plan, std::uint64_t run_seed) {
    sc.validate();
    if (plan.u.empty() || plan.u.front().norm() != 0.0) {
        throw Error("invalid_plan", "input plan must pin the first input to zero");
    }

    const OrbitParams params = sc.orbit_params();
    auto truth = make_truth_model(sc);
    Rng meas_rng = Rng(mix_seed(run_seed, 0x4d454153));  // measurement stream

    RunResult out;
    const auto t0_stage1 = std::chrono::steady_clock::now();

    ImpulseSequence applied;
    applied.period = sc.T;

    const DesignConfig design = sc.design_config();
    InputSet omega;
    omega.kind = InputSet::Kind::Box;
    omega.lower = design.u_lower;
    omega.upper = design.u_upper;

    std::optional<IrodSolution> latest;
    Mat6 latest_p0 = Mat6::Zero();

    for (int k = 0; k <= sc.n_max; ++k) {
        const double t_k = k * sc.T;
        Stage1Record rec;
        rec.k = k;
        rec.t = t_k;

        const State6 rel = truth->relative_state();
        const Vec3 y = perturb_los(los_from_state(rel), sc.sigma_theta, meas_rng);
        out.measurements.push_back({y, k, t_k});
        rec.truth = rel.vec();
        rec.los = y;

        if (k >= 2) {
            try {
                const IrodSystem sys = build_system(out.measurements, applied, params);
                IrodSolution sol = solve_scale_factors(sys);
                const StmSet stm_T = cw_stm(sc.T, params);
                sol.x0_hat =
                    reconstruct_initial_state(sol.k(0), sol.k(1), sys.los0, sys.los1, stm_T);
                const auto S = sensitivity_matrices(sys, sol);
                const Mat6 P0 = irod_covariance(S, out.measurements, sc.sigma_theta);
                const CovarianceReport report = normalize_and_analyze(P0, params);

                rec.estimate_valid = true;
                rec.x0_hat = sol.x0_hat.vec();
                rec.err_norm = (sol.x0_hat.vec() - sc.x0_true.vec()).norm();
                rec.lam_max_pos = report.lam_max_pos;
                rec.lam_max_vel = report.lam_max_vel;
                rec.kappa = report.kappa;
                rec.cond_A = sol.condition_A;
                rec.residual = sol.residual_norm;
                latest = sol;
                latest_p0 = P0;
                out.p0_history.push_back(P0);

                if (sc.mode == PipelineMode::Full && transition_check(report, sc.thresholds)) {
                    rec.transitioned = true;
                    out.stage1.push_back(rec);
                    out.transition_k = k;
                    out.t_handover = t_k;
                    break;
                }
            } catch (const Error& e) {
                if (e.code() != "scale_ambiguity_unresolved") throw;
                rec.estimate_valid = false;
            }
        }

        out.stage1.push_back(rec);
        if (k == sc.n_max) break;

        // Input for this epoch: offline plan while it lasts, then the
        // one-step adaptive selector in the plan's own flavor.
        Vec3 u_k = Vec3::Zero();
        if (k < static_cast<int>(plan.u.size())) {
            u_k = plan.u[k];
        } else {
            State6 x_now = sc.x0_nominal;
            if (latest) {
                x_now = propagate_linear(latest->x0_hat, applied, t_k, params);
            }
            std::vector<Vec3> y_history;
            y_history.reserve(out.measurements.size());
            for (const auto& m : out.measurements) y_history.push_back(m.los);

            DesignConfig seq_cfg = design;
            if (plan.provenance != PlanProvenance::ActiveLearning) {
                seq_cfg.gamma = 0.0;
                seq_cfg.q_track = Mat6::Identity();
            }
            if (plan.provenance == PlanProvenance::Dither) {
                InputSet tight = omega;
                tight.lower *= 0.9;
                tight.upper *= 0.9;
                u_k = sequential_input(x_now, y_history, sc.x0_nominal, seq_cfg, tight, params);
                Rng dither = Rng(mix_seed(run_seed, 0xd1d0 + static_cast<std::uint64_t>(k)));
                for (int i = 0; i < 3; ++i) {
                    const double amp = 0.1 * 0.5 * (design.u_upper[i] - design.u_lower[i]);
                    u_k[i] += dither.uniform(-amp, amp);
                }
            } else {
                u_k = sequential_input(x_now, y_history, sc.x0_nominal, seq_cfg, omega, params);
            }
        }
        if (k == 0 && u_k.norm() != 0.0) {
            throw Error("invalid_plan", "first input must remain zero");
        }
        if (k >= 1 && u_k.norm() > 0.0) {
            truth->apply_impulse(u_k);
            applied.impulses.push_back({k, u_k});
            out.stage1.back().u = u_k;
        }
        truth->advance(sc.T);
    }

    out.n_measurements = static_cast<int>(out.measurements.size());
    out.no_transition = sc.mode == PipelineMode::Full && out.transition_k < 0;
    out.wall_stage1_s = seconds_since(t0_stage1);

    // Initial-state estimation quality.
    {
        std::vector<std::pair<int, Vec6>> estimates;
        for (const auto& r : out.stage1) {
            if (r.estimate_valid) estimates.emplace_back(r.k, r.x0_hat);
        }
        const int n_i = 6;
        const RmaeMetric metric = rmae(estimates, sc.x0_true, n_i);
        if (metric.n_terms > 0) {
            out.rmae_percent = metric.value_percent;
            out.rmae_valid = true;
        }
    }

    if (sc.mode != PipelineMode::Full || out.transition_k < 0 || !latest) {
        return out;
    }

    // Stage 2: recursive estimation and control at the filter rate.
    if (out.t_handover >= sc.stage2_t_max - sc.ekf.dt) {
        return out;  // no closed-loop window left
    }
    const auto t0_stage2 = std::chrono::steady_clock::now();
    out.stage2_ran = true;

    const Mat6 q_step = sc.ekf.q_matrix();
    const Mat3 r_meas = sc.ekf.r_matrix(sc.sigma_theta, Vec3::UnitX());
    EkfState ekf = ekf_initialize_from_irod(latest->x0_hat, latest_p0, applied, out.t_handover,
                                            q_step, r_meas, sc.ekf.dt, params);

    std::vector<Vec3> warm;
    const double dt = sc.ekf.dt;
    double t = out.t_handover;
    const double pos_tol = 0.05, vel_tol = 0.01;

    while (t < sc.stage2_t_max - 0.5 * dt) {
        MpcConfig cfg = adapt_config(ekf.x.r.norm(), sc.mpc);
        cfg.dt = dt;
        const MpcSolution sol =
            solve_mpc(ekf.x, cfg, params, warm.empty() ? nullptr : &warm);
        const Vec3 u = sol.u_plan.front();
        warm = sol.u_plan;

        Stage2Record rec;
        rec.t = t;
        rec.u = u;
        rec.mpc_status = sol.status == MpcStatus::Optimal ? 0 : 1;

        // The commanded per-step impulse burns as constant thrust across
        // the interval; the filter predicts with the same mean acceleration.
        const Vec3 accel = u / dt;
        truth->advance(dt, accel);
        ekf = ekf_predict(ekf, accel, params);
        if (sc.ekf.tangent_r) {
            ekf.R = sc.ekf.r_matrix(sc.sigma_theta, los_from_state(ekf.x));
        }
        const State6 rel = truth->relative_state();
        const Vec3 y = perturb_los(los_from_state(rel), sc.sigma_theta, meas_rng);
        ekf = ekf_update(ekf, y);
        t += dt;

        rec.t = t;
        rec.truth = rel.vec();
        rec.estimate = ekf.x.vec();
        rec.p_diag = ekf.P.diagonal();
        const Vec6 err = ekf.x.vec() - rel.vec();
        const Eigen::LDLT<Mat6> pfac(ekf.P);
        rec.nees = err.dot(pfac.solve(err));
        out.stage2.push_back(rec);

        if (out.reach_time < 0.0 && rel.r.norm() <= pos_tol && rel.v.norm() <= vel_tol) {
            out.reach_time = t;
            break;  // terminal box reached; report errors at this epoch
        }
    }

    if (!out.stage2.empty()) {
        const auto& last = out.stage2.back();
        out.terminal_pos_err = last.truth.head<3>().norm();
        out.terminal_vel_err = last.truth.tail<3>().norm();
    }
    out.wall_stage2_s = seconds_since(t0_stage2);
    return out;
}

}  // namespace relnav
