// Compares the serial reference paths against the OpenMP kernels on the two
// data-parallel hot spots: swarm objective evaluation and Monte Carlo
// campaigns. Results must be identical; only the wall clock may differ.
#include <chrono>
#include <cstdio>
#include <iostream>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "relnav/campaign.hpp"
#include "relnav/io.hpp"
#include "relnav/scenario.hpp"

using namespace relnav;

namespace {

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

int main(int argc, char** argv) {
    int batch = 512;
    int mc_runs = 16;
    if (argc > 1) batch = std::atoi(argv[1]);
    if (argc > 2) mc_runs = std::atoi(argv[2]);

#ifdef _OPENMP
    std::printf("openmp max threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without openmp; both paths are serial\n");
#endif

    Scenario sc = default_scenario();
    apply_desk_profile(sc);
    const DesignConfig cfg = sc.design_config();
    const OrbitParams params = sc.orbit_params();

    // Batch objective evaluation.
    Rng rng(2026);
    std::vector<std::vector<Vec3>> plans;
    for (int p = 0; p < batch; ++p) {
        std::vector<Vec3> u(cfg.n_off, Vec3::Zero());
        for (int k = 1; k < cfg.n_off; ++k)
            for (int i = 0; i < 3; ++i) u[k][i] = rng.uniform(-1e-4, 1e-4);
        plans.push_back(u);
    }

    double t0 = now_s();
    const auto serial = evaluate_plan_batch_serial(plans, cfg, params);
    const double t_serial = now_s() - t0;

    t0 = now_s();
    const auto parallel = evaluate_plan_batch(plans, cfg, params, 0);
    const double t_parallel = now_s() - t0;

    bool identical = serial.size() == parallel.size();
    for (std::size_t i = 0; identical && i < serial.size(); ++i) {
        identical = serial[i] == parallel[i];
    }
    std::printf("objective batch (%d plans): serial %.4f s, openmp %.4f s, speedup %.2fx, %s\n",
                batch, t_serial, t_parallel, t_serial / std::max(t_parallel, 1e-9),
                identical ? "identical" : "MISMATCH");

    // Monte Carlo campaign on the linear-truth estimation scenario.
    sc.truth = TruthKind::Linear;
    sc.mode = PipelineMode::IrodOnly;
    sc.n_max = 12;
    PsoConfig pso{sc.pso_swarm, sc.pso_iters, sc.seed, 0, {}};
    const InputPlan plan = optimize_offline_inputs(sc.design_config(), pso, params);

    t0 = now_s();
    const auto runs_serial = monte_carlo(sc, plan, mc_runs, 1);
    const double mc_serial = now_s() - t0;

    t0 = now_s();
    const auto runs_parallel = monte_carlo(sc, plan, mc_runs, 0);
    const double mc_parallel = now_s() - t0;

    const std::string sum_a = campaign_summary_json(sc, summarize(sc, runs_serial));
    const std::string sum_b = campaign_summary_json(sc, summarize(sc, runs_parallel));
    std::printf("monte carlo (%d runs): serial %.4f s, openmp %.4f s, speedup %.2fx, %s\n",
                mc_runs, mc_serial, mc_parallel, mc_serial / std::max(mc_parallel, 1e-9),
                sum_a == sum_b ? "identical" : "MISMATCH");

    if (!identical || sum_a != sum_b) return 1;
    return 0;
}
