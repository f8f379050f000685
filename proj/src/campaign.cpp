#include "relnav/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace relnav {

std::uint64_t campaign_run_seed(std::uint64_t base_seed, int run_index) {
    return mix_seed(base_seed, 0x52554e00ULL + static_cast<std::uint64_t>(run_index));
}

std::vector<RunResult> monte_carlo(const Scenario& sc, const InputPlan& plan, int runs,
                                   int threads) {
    if (runs < 1) throw Error("invalid_campaign", "at least one run required");
    std::vector<RunResult> results(runs);
    const auto count = static_cast<std::ptrdiff_t>(runs);
#ifdef _OPENMP
    if (threads == 1) {
        for (std::ptrdiff_t m = 0; m < count; ++m) {
            results[m] = run_pipeline(sc, plan, campaign_run_seed(sc.seed, static_cast<int>(m)));
        }
    } else {
#pragma omp parallel for schedule(dynamic) \
    num_threads(threads > 0 ? threads : omp_get_max_threads())
        for (std::ptrdiff_t m = 0; m < count; ++m) {
            results[m] = run_pipeline(sc, plan, campaign_run_seed(sc.seed, static_cast<int>(m)));
        }
    }
#else
    (void)threads;
    for (std::ptrdiff_t m = 0; m < count; ++m) {
        results[m] = run_pipeline(sc, plan, campaign_run_seed(sc.seed, static_cast<int>(m)));
    }
#endif
    return results;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

CampaignSummary summarize(const Scenario& sc, const std::vector<RunResult>& results) {
    CampaignSummary s;
    s.runs = static_cast<int>(results.size());

    std::vector<double> rmaes;
    for (const auto& r : results) {
        if (r.rmae_valid) rmaes.push_back(r.rmae_percent);
    }
    s.rmae_count = static_cast<int>(rmaes.size());
    if (!rmaes.empty()) {
        s.rmae_median = median(rmaes);
        std::vector<double> dev;
        dev.reserve(rmaes.size());
        for (const double x : rmaes) dev.push_back(std::abs(x - s.rmae_median));
        s.rmae_mad = median(dev);
    }

    for (const auto& r : results) {
        s.transition_ks.push_back(r.transition_k);
        if (r.transition_k >= 0) ++s.transitions;
    }

    // Per-epoch covariance-metric medians.
    const int n_epochs = sc.n_max + 1;
    s.kappa_median_per_k.assign(n_epochs, std::numeric_limits<double>::quiet_NaN());
    s.lam_pos_median_per_k.assign(n_epochs, std::numeric_limits<double>::quiet_NaN());
    s.lam_vel_median_per_k.assign(n_epochs, std::numeric_limits<double>::quiet_NaN());
    for (int k = 0; k < n_epochs; ++k) {
        std::vector<double> kap, lp, lv;
        for (const auto& r : results) {
            for (const auto& rec : r.stage1) {
                if (rec.k == k && rec.estimate_valid) {
                    kap.push_back(rec.kappa);
                    lp.push_back(rec.lam_max_pos);
                    lv.push_back(rec.lam_max_vel);
                }
            }
        }
        if (!kap.empty()) {
            s.kappa_median_per_k[k] = median(kap);
            s.lam_pos_median_per_k[k] = median(lp);
            s.lam_vel_median_per_k[k] = median(lv);
        }
    }

    // Distribution-free containment: per epoch and component, the averaged
    // bound is the run-mean of sqrt(var/0.05); errors from every run are
    // tested against it.
    {
        struct Cell {
            std::vector<double> errs[6];
            std::vector<double> bounds[6];
        };
        std::vector<Cell> cells(n_epochs);
        for (const auto& r : results) {
            std::size_t p_idx = 0;
            for (const auto& rec : r.stage1) {
                if (!rec.estimate_valid) continue;
                if (p_idx >= r.p0_history.size()) break;
                const Mat6& P0 = r.p0_history[p_idx++];
                const Vec6 err = rec.x0_hat - sc.x0_true.vec();
                for (int c = 0; c < 6; ++c) {
                    cells[rec.k].errs[c].push_back(std::abs(err[c]));
                    cells[rec.k].bounds[c].push_back(std::sqrt(std::max(P0(c, c), 0.0) / 0.05));
                }
            }
        }
        long inside = 0, total = 0;
        for (const auto& cell : cells) {
            for (int c = 0; c < 6; ++c) {
                if (cell.bounds[c].empty()) continue;
                double mean_bound = 0.0;
                for (const double b : cell.bounds[c]) mean_bound += b;
                mean_bound /= static_cast<double>(cell.bounds[c].size());
                for (const double e : cell.errs[c]) {
                    ++total;
                    if (e <= mean_bound) ++inside;
                }
            }
        }
        s.cheb_total = total;
        s.cheb_containment =
            total > 0 ? static_cast<double>(inside) / static_cast<double>(total) : -1.0;
    }

    std::vector<double> tpos, tvel;
    double dev_sum = 0.0;
    int dev_count = 0;
    for (const auto& r : results) {
        if (r.stage2_ran && !r.stage2.empty()) {
            tpos.push_back(r.terminal_pos_err);
            tvel.push_back(r.terminal_vel_err);
            if (r.reach_time >= 0.0) ++s.reached_count;
        }
        double max_dev = 0.0;
        for (const auto& rec : r.stage1) {
            const Vec3 dr = rec.truth.head<3>() - sc.x0_true.r;
            max_dev = std::max(max_dev, dr.norm());
        }
        dev_sum += max_dev;
        ++dev_count;
    }
    if (!tpos.empty()) {
        s.terminal_pos_median = median(tpos);
        s.terminal_vel_median = median(tvel);
    }
    if (dev_count > 0) s.mean_max_station_dev = dev_sum / dev_count;
    return s;
}

SweepAxis sweep_axis_from_string(const std::string& str) {
    if (str == "distance") return SweepAxis::Distance;
    if (str == "interval") return SweepAxis::Interval;
    if (str == "gamma") return SweepAxis::Gamma;
    throw Error("invalid_campaign", "sweep axis must be distance, interval or gamma");
}

std::vector<SweepRow> sweep(const Scenario& base, SweepAxis axis,
                            const std::vector<double>& values, const InputPlan* shared_plan,
                            int runs, int threads) {
    if (values.empty()) throw Error("invalid_campaign", "sweep requires at least one value");

    InputPlan plan;
    if (shared_plan) {
        plan = *shared_plan;
    } else if (axis != SweepAxis::Gamma) {
        PsoConfig pso{base.pso_swarm, base.pso_iters, base.seed, threads, {}};
        plan = optimize_offline_inputs(base.design_config(), pso, base.orbit_params());
    }

    std::vector<SweepRow> rows;
    for (const double v : values) {
        Scenario sc = base;
        InputPlan local = plan;
        switch (axis) {
            case SweepAxis::Distance:
                sc.x0_true.r[0] = v;
                break;
            case SweepAxis::Interval:
                sc.T = v;
                local.dt = v;
                break;
            case SweepAxis::Gamma: {
                sc.design_gamma = v;
                PsoConfig pso{sc.pso_swarm, sc.pso_iters, sc.seed, threads, {}};
                local = optimize_offline_inputs(sc.design_config(), pso, sc.orbit_params());
                break;
            }
        }
        const auto results = monte_carlo(sc, local, runs, threads);
        rows.push_back({v, summarize(sc, results)});
    }
    return rows;
}

}  // namespace relnav
