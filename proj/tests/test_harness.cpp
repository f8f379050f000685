#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "relnav/campaign.hpp"
#include "relnav/io.hpp"
#include "relnav/irod.hpp"
#include "relnav/pipeline.hpp"
#include "relnav/scenario.hpp"

using namespace relnav;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string temp_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("relnav_test_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

/// Small fast scenario: linear truth, short horizon.
Scenario small_scenario() {
    Scenario sc = default_scenario();
    apply_desk_profile(sc);
    sc.truth = TruthKind::Linear;
    sc.mode = PipelineMode::IrodOnly;
    sc.n_max = 10;
    sc.n_off = 6;
    sc.pso_swarm = 12;
    sc.pso_iters = 10;
    sc.seed = 7;
    return sc;
}

InputPlan quick_plan(const Scenario& sc) {
    PsoConfig pso{sc.pso_swarm, sc.pso_iters, sc.seed, 0, {}};
    return optimize_offline_inputs(sc.design_config(), pso, sc.orbit_params());
}

}  // namespace

TEST_CASE("scenario json round trip") {
    const Scenario sc = default_scenario();
    const std::string text = scenario_to_json_text(sc);
    const Scenario back = scenario_from_json_text(text);
    CHECK(back.name == sc.name);
    CHECK(back.a == sc.a);
    CHECK(back.T == sc.T);
    CHECK(back.n_max == sc.n_max);
    CHECK(back.sigma_theta == sc.sigma_theta);
    CHECK(back.design_gamma == sc.design_gamma);
    CHECK(back.design_u_abs_max_accel == sc.design_u_abs_max_accel);
    CHECK((back.x0_true.vec() - sc.x0_true.vec()).norm() == 0.0);
    CHECK(back.thresholds.sigma2_pos == sc.thresholds.sigma2_pos);
    CHECK(back.mpc.u_max == sc.mpc.u_max);
    CHECK(back.mpc.tiers.size() == sc.mpc.tiers.size());
    CHECK(back.seed == sc.seed);
    CHECK(scenario_to_json_text(back) == text);
}

TEST_CASE("plan json round trip") {
    InputPlan plan;
    plan.dt = 600.0;
    plan.u = {Vec3::Zero(), Vec3(0.01, -0.02, 0.05), Vec3(-0.06, 0.0, 0.03)};
    plan.objective = 123.5;
    plan.provenance = PlanProvenance::Dither;
    plan.seed = 99;
    const InputPlan back = plan_from_json_text(plan_to_json_text(plan));
    CHECK(back.dt == plan.dt);
    CHECK(back.objective == plan.objective);
    CHECK(back.provenance == plan.provenance);
    CHECK(back.seed == plan.seed);
    REQUIRE(back.u.size() == plan.u.size());
    for (std::size_t i = 0; i < plan.u.size(); ++i) {
        CHECK((back.u[i] - plan.u[i]).norm() == 0.0);
    }
}

TEST_CASE("plan with nonzero first input is rejected") {
    InputPlan plan;
    plan.u = {Vec3(1e-3, 0, 0), Vec3::Zero()};
    CHECK_THROWS_AS(plan_from_json_text(plan_to_json_text(plan)), Error);
}

TEST_CASE("relative mean absolute error metric") {
    State6 x0;
    x0.r = Vec3(4850.0, 0.0, 0.0);

    SUBCASE("exact estimates give zero") {
        std::vector<std::pair<int, Vec6>> est;
        for (int k = 6; k <= 10; ++k) est.emplace_back(k, x0.vec());
        const RmaeMetric m = rmae(est, x0, 6);
        CHECK(m.value_percent == 0.0);
        CHECK(m.n_terms == 5);
    }

    SUBCASE("single estimate arithmetic") {
        Vec6 xhat = x0.vec();
        xhat[1] += 48.5;  // error norm 48.5 at 4850 -> 1 percent
        const RmaeMetric m = rmae({{6, xhat}}, x0, 6);
        CHECK(m.value_percent == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("epochs before the first included one are skipped") {
        Vec6 bad = x0.vec();
        bad[0] += 1e6;
        const RmaeMetric m = rmae({{2, bad}, {6, x0.vec()}}, x0, 6);
        CHECK(m.n_terms == 1);
        CHECK(m.value_percent == 0.0);
    }

    SUBCASE("zero along-track distance faults") {
        State6 origin;
        CHECK_THROWS_AS(rmae({{6, Vec6::Zero()}}, origin, 6), Error);
    }
}

TEST_CASE("pipeline determinism: identical seeds give byte-identical traces") {
    const Scenario sc = small_scenario();
    const InputPlan plan = quick_plan(sc);

    const RunResult a = run_pipeline(sc, plan, 31337);
    const RunResult b = run_pipeline(sc, plan, 31337);

    const std::string dir_a = temp_dir("det_a");
    const std::string dir_b = temp_dir("det_b");
    write_run_csvs(a, dir_a);
    write_run_csvs(b, dir_b);
    CHECK(slurp(dir_a + "/stage1.csv") == slurp(dir_b + "/stage1.csv"));
    CHECK(slurp(dir_a + "/stage2.csv") == slurp(dir_b + "/stage2.csv"));

    const RunResult c = run_pipeline(sc, plan, 31338);
    const std::string dir_c = temp_dir("det_c");
    write_run_csvs(c, dir_c);
    CHECK(slurp(dir_a + "/stage1.csv") != slurp(dir_c + "/stage1.csv"));
}

TEST_CASE("estimates derive from measurements alone") {
    const Scenario sc = small_scenario();
    const InputPlan plan = quick_plan(sc);
    const RunResult run = run_pipeline(sc, plan, 555);

    // Rebuild the impulse history the estimator saw.
    ImpulseSequence applied;
    applied.period = sc.T;
    for (const auto& rec : run.stage1) {
        if (rec.k >= 1 && rec.u.norm() > 0.0) applied.impulses.push_back({rec.k, rec.u});
    }

    for (const auto& rec : run.stage1) {
        if (!rec.estimate_valid) continue;
        std::vector<LosMeasurement> meas(run.measurements.begin(),
                                         run.measurements.begin() + rec.k + 1);
        ImpulseSequence upto;
        upto.period = sc.T;
        for (const auto& imp : applied.impulses) {
            if (imp.index < rec.k) upto.impulses.push_back(imp);
        }
        const IrodSolution sol = solve_irod(meas, upto, sc.orbit_params());
        CHECK((sol.x0_hat.vec() - rec.x0_hat).norm() <= 1e-9 * rec.x0_hat.norm());
    }
}

TEST_CASE("stage ordering follows the two-phase structure") {
    Scenario sc = default_scenario();
    apply_desk_profile(sc);
    sc.truth = TruthKind::Linear;
    sc.mode = PipelineMode::Full;
    sc.sigma_theta = 1e-6;  // quick transition
    sc.x0_true.r = Vec3(2000.0, 0.0, 0.0);
    sc.x0_nominal.r = Vec3(2000.0, 0.0, 0.0);
    sc.stage2_t_max = 3000.0;
    sc.pso_swarm = 12;
    sc.pso_iters = 10;

    const InputPlan plan = quick_plan(sc);
    const RunResult run = run_pipeline(sc, plan, 2);

    REQUIRE(run.transition_k >= 2);
    // No input at or after the transition epoch.
    for (const auto& rec : run.stage1) {
        if (rec.k >= run.transition_k) CHECK(rec.u.norm() == 0.0);
        if (rec.k < run.transition_k) CHECK_FALSE(rec.transitioned);
    }
    CHECK(run.stage1.back().transitioned);
    // Recursive phase begins strictly after the handover epoch.
    if (!run.stage2.empty()) {
        CHECK(run.stage2.front().t > run.t_handover);
    }
}

TEST_CASE("degenerate-noise full pipeline converges") {
    Scenario sc = default_scenario();
    apply_desk_profile(sc);
    sc.truth = TruthKind::Linear;
    sc.mode = PipelineMode::Full;
    sc.sigma_theta = 1e-9;
    sc.x0_true.r = Vec3(2000.0, 0.0, 0.0);
    sc.x0_nominal.r = Vec3(2000.0, 0.0, 0.0);
    sc.stage2_t_max = 3600.0;
    sc.pso_swarm = 12;
    sc.pso_iters = 10;

    const InputPlan plan = quick_plan(sc);
    const RunResult run = run_pipeline(sc, plan, 11);

    // Covariance is tiny as soon as it exists, so the handover is immediate.
    CHECK(run.transition_k == 2);
    REQUIRE(run.stage2_ran);
    CHECK(run.reach_time > 0.0);
    CHECK(run.terminal_pos_err <= 0.05);
    CHECK(run.terminal_vel_err <= 0.01);
}

TEST_CASE("campaign summaries and determinism across thread counts") {
    Scenario sc = small_scenario();
    sc.n_max = 8;
    const InputPlan plan = quick_plan(sc);

    const auto serial = monte_carlo(sc, plan, 6, 1);
    const auto parallel = monte_carlo(sc, plan, 6, 0);
    REQUIRE(serial.size() == parallel.size());

    const CampaignSummary sum_a = summarize(sc, serial);
    const CampaignSummary sum_b = summarize(sc, parallel);
    CHECK(campaign_summary_json(sc, sum_a) == campaign_summary_json(sc, sum_b));

    CHECK(sum_a.runs == 6);
    CHECK(sum_a.rmae_count == 6);
    CHECK(sum_a.cheb_total > 0);

    SUBCASE("single-run summary equals the run") {
        const auto one = monte_carlo(sc, plan, 1, 1);
        const CampaignSummary s1 = summarize(sc, one);
        CHECK(s1.rmae_median == doctest::Approx(one[0].rmae_percent));
        CHECK(s1.rmae_mad == 0.0);
    }
}

TEST_CASE("run artifacts and the report command round trip") {
    Scenario sc = small_scenario();
    const InputPlan plan = quick_plan(sc);
    const RunResult run = run_pipeline(sc, plan, 99);

    const std::string dir = temp_dir("report");
    write_run(sc, run, 99, dir);
    CHECK(std::filesystem::exists(dir + "/stage1.csv"));
    CHECK(std::filesystem::exists(dir + "/stage2.csv"));
    CHECK(std::filesystem::exists(dir + "/summary.json"));

    const ReportMetrics m = report_from_run_dir(dir, sc.x0_true, 6);
    CHECK(m.rmae_valid == run.rmae_valid);
    if (run.rmae_valid) {
        CHECK(m.rmae_percent == doctest::Approx(run.rmae_percent).epsilon(1e-12));
    }
}

TEST_CASE("sweep mechanics on a toy gamma axis") {
    Scenario sc = small_scenario();
    sc.n_max = 8;
    sc.pso_swarm = 8;
    sc.pso_iters = 6;
    const auto rows = sweep(sc, SweepAxis::Gamma, {1e6, 1e9}, nullptr, 2, 0);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].value == 1e6);
    CHECK(rows[1].value == 1e9);
    for (const auto& row : rows) {
        CHECK(row.summary.runs == 2);
    }
}

TEST_CASE("interval sweep shares the plan") {
    Scenario sc = small_scenario();
    sc.n_max = 6;
    const InputPlan plan = quick_plan(sc);
    const auto rows = sweep(sc, SweepAxis::Distance, {4000.0, 5000.0}, &plan, 2, 0);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].summary.rmae_count == 2);
}
