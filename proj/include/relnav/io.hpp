#ifndef RELNAV_IO_HPP
#define RELNAV_IO_HPP

#include <string>
#include <vector>

#include "relnav/campaign.hpp"
#include "relnav/pipeline.hpp"

namespace relnav {

/// CSV formatting uses shortest-roundtrip doubles so traces are
/// byte-reproducible for identical inputs.
std::string format_double(double v);

void write_run_csvs(const RunResult& run, const std::string& dir);
std::string run_summary_json(const Scenario& sc, const RunResult& run, std::uint64_t run_seed);
void write_run(const Scenario& sc, const RunResult& run, std::uint64_t run_seed,
               const std::string& dir);

void write_campaign(const Scenario& sc, const std::vector<RunResult>& results,
                    const CampaignSummary& summary, const std::string& dir,
                    bool per_run_traces);

std::string campaign_summary_json(const Scenario& sc, const CampaignSummary& summary);

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& axis,
                     const std::string& path);

/// Recompute headline metrics from a persisted run directory (stage1.csv /
/// stage2.csv) without rerunning the simulation.
struct ReportMetrics {
    double rmae_percent = 0.0;
    bool rmae_valid = false;
    int transition_k = -1;
    double terminal_pos_err = 0.0;
    double terminal_vel_err = 0.0;
    bool stage2_present = false;
};
ReportMetrics report_from_run_dir(const std::string& dir, const State6& x0_true, int n_i);

void ensure_directory(const std::string& dir);

}  // namespace relnav

#endif
