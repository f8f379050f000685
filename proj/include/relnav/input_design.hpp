#ifndef RELNAV_INPUT_DESIGN_HPP
#define RELNAV_INPUT_DESIGN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "relnav/core.hpp"
#include "relnav/dynamics.hpp"
#include "relnav/rng.hpp"

namespace relnav {

/// Weights and sampling setup for the offline excitation design.
/// Reference trajectories hold each sample at its own initial state
/// (station-keeping).
struct DesignConfig {
    int n_off = 10;        ///< designed steps (u_0 .. u_{n_off-1}), u_0 pinned to zero
    double dt = 600.0;     ///< step between impulses [s]
    double gamma = 1e3;    ///< output-dispersion weight
    double rho = 1e8;      ///< station-keeping weight
    double tau = 1e-2;     ///< effort weight
    double epsilon = 1e-12;
    Mat6 q_track = Mat6::Identity();
    Vec3 u_lower = Vec3::Constant(-1e-4);  ///< per-step impulse bounds [m/s]
    Vec3 u_upper = Vec3::Constant(1e-4);
    std::vector<State6> samples;  ///< initial-state samples

    void validate() const;
};

enum class PlanProvenance { ActiveLearning, MpcOnly, Dither };

std::string to_string(PlanProvenance p);
PlanProvenance provenance_from_string(const std::string& s);

struct InputPlan {
    std::vector<Vec3> u;  ///< per-step impulses [m/s]; u[0] == 0
    double dt = 600.0;
    double objective = 0.0;
    PlanProvenance provenance = PlanProvenance::ActiveLearning;
    std::uint64_t seed = 0;
};

struct PsoConfig {
    int swarm = 100;
    int iters = 100;
    std::uint64_t seed = 0;
    int threads = 0;  ///< 0: library default; 1: serial reference path
    std::vector<std::vector<Vec3>> seeded_candidates;  ///< injected initial particles
};

/// Admissible one-step input set for the sequential selector.
struct InputSet {
    enum class Kind { Box, Discrete };
    Kind kind = Kind::Box;
    Vec3 lower = Vec3::Zero();
    Vec3 upper = Vec3::Zero();
    std::vector<Vec3> candidates;
};

/// Batch design objective: inverse-squared output pair distances plus
/// station-keeping and effort penalties, evaluated noiselessly through the
/// discrete model.
double greedy_y_objective(const std::vector<Vec3>& u, const DesignConfig& cfg,
                          const OrbitParams& params);

/// Objective for every candidate plan; OpenMP-parallel over candidates.
std::vector<double> evaluate_plan_batch(const std::vector<std::vector<Vec3>>& plans,
                                        const DesignConfig& cfg, const OrbitParams& params,
                                        int threads = 0);

/// Serial reference for evaluate_plan_batch; results must match bit-exactly.
std::vector<double> evaluate_plan_batch_serial(const std::vector<std::vector<Vec3>>& plans,
                                               const DesignConfig& cfg,
                                               const OrbitParams& params);

/// Particle-swarm minimization of the batch objective over the per-step
/// impulse box, first step pinned to zero. Seed-deterministic regardless of
/// thread count.
InputPlan optimize_offline_inputs(const DesignConfig& cfg, const PsoConfig& pso,
                                  const OrbitParams& params);

/// One-step adaptive input: trades predicted-output dispersion against
/// tracking and effort over the admissible set.
Vec3 sequential_input(const State6& x_hat, const std::vector<Vec3>& y_history,
                      const State6& x_ref_next, const DesignConfig& cfg,
                      const InputSet& omega, const OrbitParams& params);

/// Tracking-only baseline: dispersion weight zeroed, identity tracking
/// weights.
InputPlan baseline_mpc_only(const DesignConfig& cfg, const PsoConfig& pso,
                            const OrbitParams& params);

/// Heuristic excitation baseline: tracking-only plan on tightened bounds,
/// then a uniform per-axis dither on top (first step stays zero).
InputPlan baseline_dither(const DesignConfig& cfg, const PsoConfig& pso,
                          std::uint64_t dither_seed, const OrbitParams& params);

}  // namespace relnav

#endif
