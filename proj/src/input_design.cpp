#include "relnav/input_design.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace relnav {

void DesignConfig::validate() const {
    if (n_off < 2) throw Error("invalid_design", "offline horizon must be >= 2");
    if (!(dt > 0.0)) throw Error("invalid_design", "design step must be positive");
    if (gamma < 0.0 || rho < 0.0 || tau < 0.0 || epsilon < 0.0) {
        throw Error("invalid_design", "weights must be nonnegative");
    }
    for (int i = 0; i < 3; ++i) {
        if (!(u_lower[i] <= u_upper[i])) {
            throw Error("invalid_design", "inconsistent input bounds");
        }
    }
    if (samples.empty()) throw Error("invalid_design", "at least one design sample required");
}

std::string to_string(PlanProvenance p) {
    switch (p) {
        case PlanProvenance::ActiveLearning: return "AL";
        case PlanProvenance::MpcOnly: return "MPC-only";
        case PlanProvenance::Dither: return "Dither";
    }
    return "AL";
}

PlanProvenance provenance_from_string(const std::string& s) {
    if (s == "AL") return PlanProvenance::ActiveLearning;
    if (s == "MPC-only") return PlanProvenance::MpcOnly;
    if (s == "Dither") return PlanProvenance::Dither;
    throw Error("invalid_plan", "unknown plan provenance: " + s);
}

double greedy_y_objective(const std::vector<Vec3>& u, const DesignConfig& cfg,
                          const OrbitParams& params) {
    cfg.validate();
    const int n_steps = static_cast<int>(u.size());
    if (n_steps < 1) throw Error("invalid_design", "input sequence must be nonempty");
    const int n_out = n_steps + 1;
    const int m = static_cast<int>(cfg.samples.size());

    const auto [Ad, Bd] = discretize_semi_implicit(params, cfg.dt);

    double explore = 0.0;
    double track = 0.0;
    for (const State6& sample : cfg.samples) {
        std::vector<Vec3> y(n_out);
        Vec6 x = sample.vec();
        const Vec6 ref = sample.vec();
        y[0] = x.head<3>().normalized();
        for (int k = 0; k < n_steps; ++k) {
            x = Ad * x + Bd * u[k];
            y[k + 1] = x.head<3>().normalized();
            const Vec6 dev = x - ref;
            track += dev.dot(cfg.q_track * dev);
        }
        for (int k = 0; k < n_out; ++k) {
            for (int h = 0; h < n_out; ++h) {
                if (h == k) continue;
                explore += 1.0 / ((y[k] - y[h]).squaredNorm() + cfg.epsilon);
            }
        }
    }

    double effort = 0.0;
    for (const Vec3& uk : u) effort += uk.squaredNorm();

    const double nd = static_cast<double>(n_steps);
    const double md = static_cast<double>(m);
    return cfg.gamma / (md * nd * (nd + 1.0)) * explore + cfg.rho / (md * nd) * track +
           cfg.tau / nd * effort;
}

std::vector<double> evaluate_plan_batch(const std::vector<std::vector<Vec3>>& plans,
                                        const DesignConfig& cfg, const OrbitParams& params,
                                        int threads) {
    std::vector<double> cost(plans.size(), 0.0);
    const auto count = static_cast<std::ptrdiff_t>(plans.size());
#ifdef _OPENMP
    if (threads == 1) {
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            cost[i] = greedy_y_objective(plans[i], cfg, params);
        }
    } else {
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : omp_get_max_threads())
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            cost[i] = greedy_y_objective(plans[i], cfg, params);
        }
    }
#else
    (void)threads;
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        cost[i] = greedy_y_objective(plans[i], cfg, params);
    }
#endif
    return cost;
}

std::vector<double> evaluate_plan_batch_serial(const std::vector<std::vector<Vec3>>& plans,
                                               const DesignConfig& cfg,
                                               const OrbitParams& params) {
    std::vector<double> cost(plans.size(), 0.0);
    for (std::size_t i = 0; i < plans.size(); ++i) {
        cost[i] = greedy_y_objective(plans[i], cfg, params);
    }
    return cost;
}

namespace {

std::vector<Vec3> decode_particle(const Eigen::VectorXd& z, int n_off) {
    std::vector<Vec3> u(n_off, Vec3::Zero());
    for (int k = 1; k < n_off; ++k) {
        u[k] = z.segment<3>(3 * (k - 1));
    }
    return u;
}

}  // namespace

InputPlan optimize_offline_inputs(const DesignConfig& cfg, const PsoConfig& pso,
                                  const OrbitParams& params) {
    cfg.validate();
    if (pso.swarm < 1 || pso.iters < 0) {
        throw Error("invalid_design", "swarm size must be >= 1 and iterations >= 0");
    }
    const int n_free = cfg.n_off - 1;
    const int dim = 3 * n_free;

    Eigen::VectorXd lo(dim), hi(dim);
    for (int k = 0; k < n_free; ++k) {
        lo.segment<3>(3 * k) = cfg.u_lower;
        hi.segment<3>(3 * k) = cfg.u_upper;
    }
    const Eigen::VectorXd width = hi - lo;
    const Eigen::VectorXd v_clamp = 0.5 * width;

    const int swarm = pso.swarm;
    std::vector<Eigen::VectorXd> x(swarm), v(swarm), pbest(swarm);
    std::vector<double> pbest_cost(swarm);

    Rng rng(pso.seed);

    // Initial population: the zero sequence, cross-track alternating
    // patterns as structured starting points, injected candidates, then
    // uniform samples in the box.
    std::vector<std::vector<Vec3>> injected;
    injected.emplace_back(cfg.n_off, Vec3::Zero());
    {
        auto pattern = [&](bool use_y, bool use_z) {
            std::vector<Vec3> u(cfg.n_off, Vec3::Zero());
            for (int k = 1; k < cfg.n_off; ++k) {
                const bool odd = (k % 2) != 0;
                if (use_y) u[k][1] = odd ? cfg.u_upper[1] : cfg.u_lower[1];
                if (use_z) u[k][2] = odd ? cfg.u_lower[2] : cfg.u_upper[2];
            }
            return u;
        };
        injected.push_back(pattern(true, false));
        injected.push_back(pattern(false, true));
        injected.push_back(pattern(true, true));
    }
    for (const auto& cand : pso.seeded_candidates) injected.push_back(cand);

    for (int p = 0; p < swarm; ++p) {
        Eigen::VectorXd z(dim);
        if (p < static_cast<int>(injected.size())) {
            const auto& cand = injected[p];
            for (int k = 1; k < cfg.n_off; ++k) {
                const Vec3 uk = (k < static_cast<int>(cand.size())) ? cand[k] : Vec3::Zero();
                z.segment<3>(3 * (k - 1)) = uk;
            }
        } else {
            for (int d = 0; d < dim; ++d) z[d] = rng.uniform(lo[d], hi[d]);
        }
        for (int d = 0; d < dim; ++d) z[d] = std::clamp(z[d], lo[d], hi[d]);
        x[p] = z;
        Eigen::VectorXd vel(dim);
        for (int d = 0; d < dim; ++d) vel[d] = rng.uniform(-v_clamp[d], v_clamp[d]);
        v[p] = vel;
    }

    std::vector<std::vector<Vec3>> plans(swarm);
    for (int p = 0; p < swarm; ++p) plans[p] = decode_particle(x[p], cfg.n_off);
    std::vector<double> cost = evaluate_plan_batch(plans, cfg, params, pso.threads);

    int gbest_idx = 0;
    for (int p = 0; p < swarm; ++p) {
        pbest[p] = x[p];
        pbest_cost[p] = cost[p];
        if (cost[p] < cost[gbest_idx]) gbest_idx = p;
    }
    Eigen::VectorXd gbest = pbest[gbest_idx];
    double gbest_cost = pbest_cost[gbest_idx];

    // Canonical constriction coefficients.
    const double inertia = 0.729;
    const double c_cog = 1.49445;
    const double c_soc = 1.49445;

    for (int it = 0; it < pso.iters; ++it) {
        // Serial RNG phase keeps the stream independent of scheduling.
        for (int p = 0; p < swarm; ++p) {
            for (int d = 0; d < dim; ++d) {
                const double r1 = rng.uniform01();
                const double r2 = rng.uniform01();
                double vel = inertia * v[p][d] + c_cog * r1 * (pbest[p][d] - x[p][d]) +
                             c_soc * r2 * (gbest[d] - x[p][d]);
                vel = std::clamp(vel, -v_clamp[d], v_clamp[d]);
                v[p][d] = vel;
                x[p][d] = std::clamp(x[p][d] + vel, lo[d], hi[d]);
            }
            plans[p] = decode_particle(x[p], cfg.n_off);
        }
        cost = evaluate_plan_batch(plans, cfg, params, pso.threads);
        for (int p = 0; p < swarm; ++p) {
            if (cost[p] < pbest_cost[p]) {
                pbest_cost[p] = cost[p];
                pbest[p] = x[p];
            }
            if (cost[p] < gbest_cost) {
                gbest_cost = cost[p];
                gbest = x[p];
            }
        }
    }

    InputPlan plan;
    plan.u = decode_particle(gbest, cfg.n_off);
    plan.dt = cfg.dt;
    plan.objective = gbest_cost;
    plan.provenance = PlanProvenance::ActiveLearning;
    plan.seed = pso.seed;
    return plan;
}

namespace {

double sequential_cost(const Vec3& u, const Vec6& x_vec, const Mat6& Ad, const Mat63& Bd,
                       const std::vector<Vec3>& y_history, const State6& x_ref_next,
                       const DesignConfig& cfg) {
    const Vec6 xn = Ad * x_vec + Bd * u;
    double explore = 0.0;
    if (cfg.gamma > 0.0 && !y_history.empty()) {
        const double rn = xn.head<3>().norm();
        if (rn > 0.0) {
            const Vec3 y_pred = xn.head<3>() / rn;
            for (const Vec3& yj : y_history) {
                explore += 1.0 / ((y_pred - yj).squaredNorm() + cfg.epsilon);
            }
            explore *= cfg.gamma / static_cast<double>(y_history.size());
        }
    }
    const Vec6 dev = xn - x_ref_next.vec();
    return explore + cfg.rho * dev.dot(cfg.q_track * dev) + cfg.tau * u.squaredNorm();
}

}  // namespace

Vec3 sequential_input(const State6& x_hat, const std::vector<Vec3>& y_history,
                      const State6& x_ref_next, const DesignConfig& cfg,
                      const InputSet& omega, const OrbitParams& params) {
    const auto [Ad, Bd] = discretize_semi_implicit(params, cfg.dt);
    const Vec6 x_vec = x_hat.vec();
    auto cost = [&](const Vec3& u) {
        return sequential_cost(u, x_vec, Ad, Bd, y_history, x_ref_next, cfg);
    };

    if (omega.kind == InputSet::Kind::Discrete) {
        if (omega.candidates.empty()) {
            throw Error("empty_input_set", "discrete admissible input set is empty");
        }
        Vec3 best = omega.candidates[0];
        double best_cost = cost(best);
        for (std::size_t i = 1; i < omega.candidates.size(); ++i) {
            const double c = cost(omega.candidates[i]);
            if (c < best_cost) {
                best_cost = c;
                best = omega.candidates[i];
            }
        }
        return best;
    }

    for (int i = 0; i < 3; ++i) {
        if (!(omega.lower[i] <= omega.upper[i])) {
            throw Error("empty_input_set", "admissible input box is empty");
        }
    }

    // 5x5x5 tensor grid over the box, refined once around the best cell.
    auto grid_search = [&](const Vec3& lo, const Vec3& hi) {
        constexpr int kPoints = 5;
        Vec3 best = lo;
        double best_cost = std::numeric_limits<double>::infinity();
        for (int i = 0; i < kPoints; ++i) {
            for (int j = 0; j < kPoints; ++j) {
                for (int k = 0; k < kPoints; ++k) {
                    Vec3 u;
                    u[0] = lo[0] + (hi[0] - lo[0]) * i / (kPoints - 1);
                    u[1] = lo[1] + (hi[1] - lo[1]) * j / (kPoints - 1);
                    u[2] = lo[2] + (hi[2] - lo[2]) * k / (kPoints - 1);
                    const double c = cost(u);
                    if (c < best_cost) {
                        best_cost = c;
                        best = u;
                    }
                }
            }
        }
        return std::make_pair(best, best_cost);
    };

    const auto [coarse, coarse_cost] = grid_search(omega.lower, omega.upper);
    const Vec3 spacing = (omega.upper - omega.lower) / 4.0;
    const Vec3 lo_fine = (coarse - spacing).cwiseMax(omega.lower);
    const Vec3 hi_fine = (coarse + spacing).cwiseMin(omega.upper);
    const auto [fine, fine_cost] = grid_search(lo_fine, hi_fine);
    return fine_cost < coarse_cost ? fine : coarse;
}

InputPlan baseline_mpc_only(const DesignConfig& cfg, const PsoConfig& pso,
                            const OrbitParams& params) {
    DesignConfig tracking = cfg;
    tracking.gamma = 0.0;
    tracking.q_track = Mat6::Identity();
    InputPlan plan = optimize_offline_inputs(tracking, pso, params);
    plan.provenance = PlanProvenance::MpcOnly;
    return plan;
}

InputPlan baseline_dither(const DesignConfig& cfg, const PsoConfig& pso,
                          std::uint64_t dither_seed, const OrbitParams& params) {
    DesignConfig tracking = cfg;
    tracking.gamma = 0.0;
    tracking.q_track = Mat6::Identity();
    tracking.u_lower = 0.9 * cfg.u_lower;
    tracking.u_upper = 0.9 * cfg.u_upper;
    InputPlan plan = optimize_offline_inputs(tracking, pso, params);

    Rng rng(dither_seed);
    for (std::size_t k = 1; k < plan.u.size(); ++k) {
        for (int i = 0; i < 3; ++i) {
            const double amp = 0.1 * 0.5 * (cfg.u_upper[i] - cfg.u_lower[i]);
            plan.u[k][i] += rng.uniform(-amp, amp);
        }
    }
    plan.provenance = PlanProvenance::Dither;
    plan.seed = dither_seed;
    plan.objective = greedy_y_objective(plan.u, cfg, params);
    return plan;
}

}  // namespace relnav
