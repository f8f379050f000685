#include "relnav/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace relnav {

void MpcConfig::validate() const {
    if (horizon < 1) throw Error("invalid_mpc", "horizon must be >= 1");
    if (!(dt > 0.0)) throw Error("invalid_mpc", "step must be positive");
    if (!(u_max > 0.0) || !(r_max > 0.0) || !(v_max > 0.0)) {
        throw Error("invalid_mpc", "bounds must be positive");
    }
    if (w_pos < 0.0 || w_vel < 0.0 || w_u < 0.0 || w_term < 0.0) {
        throw Error("invalid_mpc", "weights must be nonnegative");
    }
}

Vec3 pd_fallback(const State6& x_hat, double kp, double kd, double u_max) {
    if (!(kp > 0.0) || !(kd > 0.0)) {
        throw Error("invalid_mpc", "fallback gains must be positive");
    }
    Vec3 u = -kp * x_hat.r - kd * x_hat.v;
    return u.cwiseMax(-u_max).cwiseMin(u_max);
}

MpcConfig adapt_config(double range, const MpcConfig& base) {
    if (range < 0.0) throw Error("invalid_mpc", "range must be nonnegative");
    MpcConfig cfg = base;
    for (const auto& tier : base.tiers) {
        if (range < tier.range_trigger) {
            cfg.u_max = std::min(cfg.u_max, tier.u_max);
            cfg.r_max = std::min(cfg.r_max, tier.r_max);
            cfg.v_max = std::min(cfg.v_max, tier.v_max);
        }
    }
    return cfg;
}

namespace {

struct Qp {
    // minimize 0.5 w' P w + q' w  s.t.  l <= A w <= u   (scaled variables)
    Eigen::MatrixXd P;
    Eigen::VectorXd q;
    Eigen::MatrixXd A;
    Eigen::VectorXd l;
    Eigen::VectorXd u;
    double u_scale = 1.0;  // U = u_scale * w
};

/// Condensed horizon problem in scaled variables (inputs divided by u_max,
/// constraint rows by their box bound).
Qp build_qp(const State6& x0, const MpcConfig& cfg, const Mat6& Ad, const Mat63& Bd) {
    const int H = cfg.horizon;
    const int dim = 3 * H;

    const double s_r = std::max(x0.r.norm(), 1.0);
    const double s_v = std::max(x0.v.norm(), 0.1);
    const double c_r = cfg.w_pos / (s_r * s_r);
    const double c_v = cfg.w_vel / (s_v * s_v);
    const double c_u = cfg.w_u / (cfg.u_max * cfg.u_max);
    const double t_r = cfg.w_term / (s_r * s_r);
    const double t_v = cfg.w_term / (s_v * s_v);

    // Free responses E_j and input maps G_j (j = 1..H).
    std::vector<Vec6> E(H + 1);
    std::vector<Eigen::MatrixXd> G(H + 1);
    E[0] = x0.vec();
    G[0] = Eigen::MatrixXd::Zero(6, dim);
    for (int j = 1; j <= H; ++j) {
        E[j] = Ad * E[j - 1];
        G[j] = Ad * G[j - 1];
        G[j].middleCols<3>(3 * (j - 1)) = Bd;
    }

    Qp qp;
    qp.u_scale = cfg.u_max;
    qp.P = Eigen::MatrixXd::Zero(dim, dim);
    qp.q = Eigen::VectorXd::Zero(dim);

    for (int j = 1; j <= H; ++j) {
        Vec6 w_diag;
        if (j < H) {
            w_diag << c_r, c_r, c_r, c_v, c_v, c_v;
        } else {
            w_diag << t_r, t_r, t_r, t_v, t_v, t_v;
        }
        const Eigen::MatrixXd WG = w_diag.asDiagonal() * G[j];
        qp.P += 2.0 * G[j].transpose() * WG;
        qp.q += 2.0 * G[j].transpose() * (w_diag.asDiagonal() * E[j]);
    }
    qp.P.diagonal().array() += 2.0 * c_u;

    // Scale variables: w = U / u_max.
    qp.P *= cfg.u_max * cfg.u_max;
    qp.q *= cfg.u_max;

    const int n_con = dim + 6 * H;
    qp.A = Eigen::MatrixXd::Zero(n_con, dim);
    qp.l = Eigen::VectorXd::Zero(n_con);
    qp.u = Eigen::VectorXd::Zero(n_con);

    qp.A.topRows(dim) = Eigen::MatrixXd::Identity(dim, dim);
    qp.l.head(dim).setConstant(-1.0);
    qp.u.head(dim).setConstant(1.0);

    for (int j = 1; j <= H; ++j) {
        Vec6 scale;
        scale << cfg.r_max, cfg.r_max, cfg.r_max, cfg.v_max, cfg.v_max, cfg.v_max;
        const int row = dim + 6 * (j - 1);
        qp.A.middleRows<6>(row) =
            scale.cwiseInverse().asDiagonal() * (G[j] * cfg.u_max);
        const Vec6 offset = scale.cwiseInverse().asDiagonal() * E[j];
        qp.l.segment<6>(row) = -Vec6::Ones() - offset;
        qp.u.segment<6>(row) = Vec6::Ones() - offset;
    }
    return qp;
}

struct AdmmResult {
    Eigen::VectorXd w;
    Eigen::VectorXd z;
    Eigen::VectorXd y;
    double prim_res = std::numeric_limits<double>::infinity();
    double dual_res = std::numeric_limits<double>::infinity();
};

class AdmmSolver {
public:
    AdmmSolver(const Qp& qp, const Eigen::VectorXd* warm_w) : qp_(qp) {
        const int dim = static_cast<int>(qp.P.rows());
        const int n_con = static_cast<int>(qp.A.rows());
        Eigen::MatrixXd K = qp.P;
        K.diagonal().array() += sigma_;
        K.noalias() += rho_ * qp.A.transpose() * qp.A;
        chol_.compute(K);
        res_.w = warm_w ? *warm_w : Eigen::VectorXd::Zero(dim);
        res_.z = (qp.A * res_.w).cwiseMax(qp.l).cwiseMin(qp.u);
        res_.y = Eigen::VectorXd::Zero(n_con);
    }

    /// Runs up to `iters` iterations; returns true once both residuals are
    /// under tol.
    bool iterate(int iters, double tol) {
        for (int it = 0; it < iters; ++it) {
            const Eigen::VectorXd rhs =
                sigma_ * res_.w - qp_.q + qp_.A.transpose() * (rho_ * res_.z - res_.y);
            res_.w = chol_.solve(rhs);
            const Eigen::VectorXd Aw = qp_.A * res_.w;
            res_.z = (Aw + res_.y / rho_).cwiseMax(qp_.l).cwiseMin(qp_.u);
            res_.y += rho_ * (Aw - res_.z);

            if (it % 25 == 24 || it == iters - 1) {
                res_.prim_res = (Aw - res_.z).lpNorm<Eigen::Infinity>();
                res_.dual_res =
                    (qp_.P * res_.w + qp_.q + qp_.A.transpose() * res_.y)
                        .lpNorm<Eigen::Infinity>();
                if (res_.prim_res < tol && res_.dual_res < tol) return true;
            }
        }
        return false;
    }

    AdmmResult& result() { return res_; }

private:
    const Qp& qp_;
    const double rho_ = 1.0;
    const double sigma_ = 1e-6;
    Eigen::LLT<Eigen::MatrixXd> chol_;
    AdmmResult res_;
};

/// Equality-KKT solve on the active set detected from the ADMM iterate.
/// Returns true and overwrites w on success.
bool polish(const Qp& qp, AdmmResult& res, double tol) {
    const int n_con = static_cast<int>(qp.A.rows());
    std::vector<int> active;
    std::vector<double> target;
    std::vector<int> side;  // -1 lower, +1 upper
    for (int i = 0; i < n_con; ++i) {
        int s = 0;
        if (res.y[i] < -1e-10) {
            s = -1;
        } else if (res.y[i] > 1e-10) {
            s = +1;
        } else if (res.z[i] - qp.l[i] < 1e-9) {
            s = -1;
        } else if (qp.u[i] - res.z[i] < 1e-9) {
            s = +1;
        }
        if (s != 0) {
            active.push_back(i);
            target.push_back(s < 0 ? qp.l[i] : qp.u[i]);
            side.push_back(s);
        }
    }

    const Eigen::LLT<Eigen::MatrixXd> pfac(qp.P);
    if (pfac.info() != Eigen::Success) return false;
    const Eigen::VectorXd w_free = pfac.solve(-qp.q);

    Eigen::VectorXd w;
    Eigen::VectorXd nu;
    if (active.empty()) {
        w = w_free;
    } else {
        const int na = static_cast<int>(active.size());
        Eigen::MatrixXd Aact(na, qp.A.cols());
        Eigen::VectorXd b(na);
        for (int i = 0; i < na; ++i) {
            Aact.row(i) = qp.A.row(active[i]);
            b[i] = target[i];
        }
        const Eigen::MatrixXd PiAt = pfac.solve(Aact.transpose());
        Eigen::MatrixXd S = Aact * PiAt;
        S.diagonal().array() += 1e-12;
        const Eigen::LDLT<Eigen::MatrixXd> sfac(S);
        if (sfac.info() != Eigen::Success) return false;
        nu = sfac.solve(Aact * w_free - b);
        w = w_free - PiAt * nu;

        // Dual feasibility per active side.
        for (int i = 0; i < na; ++i) {
            if (side[i] < 0 && nu[i] > 1e-8) return false;
            if (side[i] > 0 && nu[i] < -1e-8) return false;
        }
    }

    const Eigen::VectorXd Aw = qp.A * w;
    const double viol = std::max((qp.l - Aw).maxCoeff(), (Aw - qp.u).maxCoeff());
    if (viol > 1e-9) return false;

    const double obj_pol = 0.5 * w.dot(qp.P * w) + qp.q.dot(w);
    const double obj_adm = 0.5 * res.w.dot(qp.P * res.w) + qp.q.dot(res.w);
    if (obj_pol > obj_adm + std::max(tol, 1e-9 * std::abs(obj_adm))) return false;

    res.w = w;
    res.prim_res = std::max(viol, 0.0);
    res.dual_res = 0.0;
    return true;
}

}  // namespace

MpcSolution solve_mpc(const State6& x_hat, const MpcConfig& cfg, const OrbitParams& params,
                      const std::vector<Vec3>* warm_start) {
    cfg.validate();
    if (!x_hat.vec().allFinite()) {
        throw Error("invalid_state", "controller state must be finite");
    }
    const int H = cfg.horizon;
    const auto [Ad, Bd] = discretize_semi_implicit(params, cfg.dt);
    const Qp qp = build_qp(x_hat, cfg, Ad, Bd);

    Eigen::VectorXd warm_w;
    const Eigen::VectorXd* warm_ptr = nullptr;
    if (warm_start && static_cast<int>(warm_start->size()) == H) {
        warm_w.resize(3 * H);
        for (int j = 0; j < H; ++j) {
            const Vec3 u = (j + 1 < H) ? (*warm_start)[j + 1] : Vec3::Zero();
            warm_w.segment<3>(3 * j) =
                (u / qp.u_scale).cwiseMax(-1.0).cwiseMin(1.0);
        }
        warm_ptr = &warm_w;
    }

    // Alternate splitting iterations with exact active-set polish attempts;
    // the polish typically lands the exact solution long before the
    // iterations alone reach the tolerance.
    AdmmSolver solver(qp, warm_ptr);
    const double tol = std::max(cfg.tol, 1e-10);
    bool polished = false;
    bool converged = false;
    int done = 0;
    while (done < cfg.max_iters) {
        const int chunk = std::min(done == 0 ? 150 : 300, cfg.max_iters - done);
        const bool admm_ok = solver.iterate(chunk, tol);
        done += chunk;
        if (polish(qp, solver.result(), cfg.tol)) {
            polished = true;
            converged = true;
            break;
        }
        if (admm_ok) {
            converged = true;
            break;
        }
    }
    AdmmResult& res = solver.result();
    (void)polished;

    MpcSolution sol;
    if (!converged) {
        sol.status = MpcStatus::Fallback;
        sol.u_plan.assign(H, Vec3::Zero());
        sol.u_plan[0] = pd_fallback(x_hat, cfg.kp, cfg.kd, cfg.u_max);
    } else {
        sol.status = MpcStatus::Optimal;
        sol.u_plan.resize(H);
        for (int j = 0; j < H; ++j) {
            sol.u_plan[j] = qp.u_scale * Vec3(res.w.segment<3>(3 * j));
            sol.u_plan[j] = sol.u_plan[j].cwiseMax(-cfg.u_max).cwiseMin(cfg.u_max);
        }
    }

    // Rollout of the returned plan; objective evaluated on the unscaled
    // problem including the fixed initial-state terms.
    sol.predicted.resize(H + 1);
    sol.predicted[0] = x_hat;
    for (int j = 0; j < H; ++j) {
        const Vec6 xn = Ad * sol.predicted[j].vec() + Bd * sol.u_plan[j];
        sol.predicted[j + 1] = State6::from_vec(xn);
    }
    const double s_r = std::max(x_hat.r.norm(), 1.0);
    const double s_v = std::max(x_hat.v.norm(), 0.1);
    double obj = 0.0;
    for (int j = 0; j < H; ++j) {
        obj += cfg.w_pos / (s_r * s_r) * sol.predicted[j].r.squaredNorm() +
               cfg.w_vel / (s_v * s_v) * sol.predicted[j].v.squaredNorm() +
               cfg.w_u / (cfg.u_max * cfg.u_max) * sol.u_plan[j].squaredNorm();
    }
    obj += cfg.w_term * (sol.predicted[H].r.squaredNorm() / (s_r * s_r) +
                         sol.predicted[H].v.squaredNorm() / (s_v * s_v));
    sol.objective = obj;
    return sol;
}

}  // namespace relnav
