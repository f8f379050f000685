#ifndef RELNAV_CAMPAIGN_HPP
#define RELNAV_CAMPAIGN_HPP

#include <string>
#include <vector>

#include "relnav/pipeline.hpp"

namespace relnav {

struct CampaignSummary {
    int runs = 0;
    double rmae_median = 0.0;
    double rmae_mad = 0.0;
    int rmae_count = 0;
    std::vector<int> transition_ks;  ///< -1 for runs without transition
    int transitions = 0;
    double cheb_containment = -1.0;  ///< pooled fraction inside averaged bounds
    long cheb_total = 0;
    std::vector<double> kappa_median_per_k;    ///< indexed by epoch, NaN if absent
    std::vector<double> lam_pos_median_per_k;  ///< [m^2]
    std::vector<double> lam_vel_median_per_k;  ///< [m^2/s^2]
    int reached_count = 0;
    double terminal_pos_median = 0.0;
    double terminal_vel_median = 0.0;
    double mean_max_station_dev = 0.0;  ///< mean over runs of max position deviation [m]
};

/// Seed-deterministic Monte Carlo campaign; one isolated pipeline run per
/// seed, OpenMP-parallel across runs. threads == 1 is the serial reference
/// path and must produce identical results.
std::vector<RunResult> monte_carlo(const Scenario& sc, const InputPlan& plan, int runs,
                                   int threads = 0);

std::uint64_t campaign_run_seed(std::uint64_t base_seed, int run_index);

CampaignSummary summarize(const Scenario& sc, const std::vector<RunResult>& results);

enum class SweepAxis { Distance, Interval, Gamma };

SweepAxis sweep_axis_from_string(const std::string& s);

struct SweepRow {
    double value = 0.0;
    CampaignSummary summary;
};

/// One campaign per value. Distance and interval sweeps reuse the shared
/// plan; the gamma sweep redesigns the plan per value.
std::vector<SweepRow> sweep(const Scenario& base, SweepAxis axis,
                            const std::vector<double>& values, const InputPlan* shared_plan,
                            int runs, int threads = 0);

double median(std::vector<double> v);

}  // namespace relnav

#endif
