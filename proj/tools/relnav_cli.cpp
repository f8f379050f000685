#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "relnav/campaign.hpp"
#include "relnav/io.hpp"
#include "relnav/pipeline.hpp"
#include "relnav/scenario.hpp"

namespace {

using namespace relnav;

struct CommonOpts {
    std::string scenario_path;
    std::string plan_path;
    std::string out = "out";
    std::string profile = "paper";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_scenario = true) {
    auto* s = cmd->add_option("--scenario", opts.scenario_path, "Scenario JSON file");
    if (needs_scenario) s->required();
    cmd->add_option("--plan", opts.plan_path, "Input plan JSON file");
    cmd->add_option("--out", opts.out, "Output directory");
    cmd->add_option("--profile", opts.profile, "Effort profile: paper or desk")
        ->check(CLI::IsMember({"paper", "desk"}));
    cmd->add_option("--seed", opts.seed, "Override the scenario seed")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--threads", opts.threads, "Worker threads (0 = all, 1 = serial)");
}

Scenario load_with_profile(const CommonOpts& opts) {
    Scenario sc = load_scenario(opts.scenario_path);
    if (opts.profile == "desk") apply_desk_profile(sc);
    if (opts.seed_set) sc.seed = opts.seed;
    return sc;
}

InputPlan design_plan(const Scenario& sc, const std::string& provenance, int threads) {
    const DesignConfig cfg = sc.design_config();
    PsoConfig pso;
    pso.swarm = sc.pso_swarm;
    pso.iters = sc.pso_iters;
    pso.seed = sc.seed;
    pso.threads = threads;
    if (provenance == "MPC-only") return baseline_mpc_only(cfg, pso, sc.orbit_params());
    if (provenance == "Dither") {
        return baseline_dither(cfg, pso, mix_seed(sc.seed, 0xd1d0), sc.orbit_params());
    }
    return optimize_offline_inputs(cfg, pso, sc.orbit_params());
}

InputPlan obtain_plan(const Scenario& sc, const CommonOpts& opts) {
    if (!opts.plan_path.empty()) return load_plan(opts.plan_path);
    return design_plan(sc, "AL", opts.threads);
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t next = csv.find(',', pos);
        if (next == std::string::npos) next = csv.size();
        out.push_back(std::stod(csv.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relative-navigation simulation toolkit"};
    app.require_subcommand(1);

    CommonOpts design_opts, run_opts, mc_opts, sweep_opts;
    std::string design_provenance = "AL";
    std::string run_mode;
    int mc_runs = 0;
    bool mc_traces = false;
    std::string sweep_axis_str = "distance";
    std::string sweep_values_csv;
    int sweep_runs = 0;
    std::string report_dir;
    std::string report_scenario;
    int report_ni = 6;
    std::string init_out = "scenario.json";

    auto* cmd_design = app.add_subcommand("design", "Optimize an offline input plan");
    add_common(cmd_design, design_opts);
    cmd_design->add_option("--provenance", design_provenance, "AL, MPC-only or Dither")
        ->check(CLI::IsMember({"AL", "MPC-only", "Dither"}));

    auto* cmd_run = app.add_subcommand("run", "Execute a single pipeline run");
    add_common(cmd_run, run_opts);
    cmd_run->add_option("--mode", run_mode, "Override pipeline mode: full or irod_only")
        ->check(CLI::IsMember({"full", "irod_only"}));

    auto* cmd_mc = app.add_subcommand("mc", "Monte Carlo campaign");
    add_common(cmd_mc, mc_opts);
    cmd_mc->add_option("--runs", mc_runs, "Number of runs (default from scenario)");
    cmd_mc->add_flag("--traces", mc_traces, "Persist per-run CSV traces");

    auto* cmd_sweep = app.add_subcommand("sweep", "Parameter sweep campaign");
    add_common(cmd_sweep, sweep_opts);
    cmd_sweep->add_option("--axis", sweep_axis_str, "distance, interval or gamma")->required();
    cmd_sweep->add_option("--values", sweep_values_csv, "Comma-separated values")->required();
    cmd_sweep->add_option("--runs", sweep_runs, "Runs per value (default from scenario)");

    auto* cmd_report = app.add_subcommand("report", "Recompute metrics from stored traces");
    cmd_report->add_option("--in", report_dir, "Run directory")->required();
    cmd_report->add_option("--scenario", report_scenario, "Scenario JSON file")->required();
    cmd_report->add_option("--ni", report_ni, "First epoch included in the error metric");

    auto* cmd_init = app.add_subcommand("init-scenario", "Write the reference scenario");
    cmd_init->add_option("--out", init_out, "Output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_design->parsed()) {
            const Scenario sc = load_with_profile(design_opts);
            const InputPlan plan = design_plan(sc, design_provenance, design_opts.threads);
            ensure_directory(design_opts.out);
            const std::string path = design_opts.out + "/plan.json";
            save_plan(plan, path);
            std::cout << "plan " << to_string(plan.provenance) << " objective "
                      << format_double(plan.objective) << " -> " << path << "\n";
        } else if (cmd_run->parsed()) {
            Scenario sc = load_with_profile(run_opts);
            if (run_mode == "full") sc.mode = PipelineMode::Full;
            if (run_mode == "irod_only") sc.mode = PipelineMode::IrodOnly;
            const InputPlan plan = obtain_plan(sc, run_opts);
            const RunResult result = run_pipeline(sc, plan, sc.seed);
            write_run(sc, result, sc.seed, run_opts.out);
            std::cout << run_summary_json(sc, result, sc.seed);
        } else if (cmd_mc->parsed()) {
            const Scenario sc = load_with_profile(mc_opts);
            const InputPlan plan = obtain_plan(sc, mc_opts);
            const int runs = mc_runs > 0 ? mc_runs : sc.mc_runs;
            const auto results = monte_carlo(sc, plan, runs, mc_opts.threads);
            const CampaignSummary summary = summarize(sc, results);
            write_campaign(sc, results, summary, mc_opts.out, mc_traces);
            std::cout << campaign_summary_json(sc, summary);
        } else if (cmd_sweep->parsed()) {
            const Scenario sc = load_with_profile(sweep_opts);
            const SweepAxis axis = sweep_axis_from_string(sweep_axis_str);
            const auto values = parse_values(sweep_values_csv);
            const int runs = sweep_runs > 0 ? sweep_runs : sc.mc_runs;
            InputPlan plan;
            const InputPlan* plan_ptr = nullptr;
            if (!sweep_opts.plan_path.empty()) {
                plan = load_plan(sweep_opts.plan_path);
                plan_ptr = &plan;
            }
            const auto rows = sweep(sc, axis, values, plan_ptr, runs, sweep_opts.threads);
            ensure_directory(sweep_opts.out);
            const std::string path = sweep_opts.out + "/sweep_" + sweep_axis_str + ".csv";
            write_sweep_csv(rows, sweep_axis_str, path);
            std::cout << "sweep table -> " << path << "\n";
            for (const auto& row : rows) {
                std::cout << sweep_axis_str << "=" << format_double(row.value)
                          << " rmae_median=" << format_double(row.summary.rmae_median)
                          << " transitions=" << row.summary.transitions << "/"
                          << row.summary.runs << "\n";
            }
        } else if (cmd_report->parsed()) {
            const Scenario sc = load_scenario(report_scenario);
            const ReportMetrics m = report_from_run_dir(report_dir, sc.x0_true, report_ni);
            std::cout << "{\n  \"rmae_percent\": "
                      << (m.rmae_valid ? format_double(m.rmae_percent) : "null")
                      << ",\n  \"transition_k\": " << m.transition_k
                      << ",\n  \"stage2_present\": " << (m.stage2_present ? "true" : "false")
                      << ",\n  \"terminal_pos_err_m\": " << format_double(m.terminal_pos_err)
                      << ",\n  \"terminal_vel_err_ms\": " << format_double(m.terminal_vel_err)
                      << "\n}\n";
        } else if (cmd_init->parsed()) {
            save_scenario(default_scenario(), init_out);
            std::cout << "scenario -> " << init_out << "\n";
        }
    } catch (const relnav::Error& e) {
        std::cerr << "{\"error\": \"" << e.code() << "\", \"message\": \"" << e.what()
                  << "\"}\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "{\"error\": \"internal\", \"message\": \"" << e.what() << "\"}\n";
        return 1;
    }
    return 0;
}
