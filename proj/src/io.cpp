#include "relnav/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace relnav {

using nlohmann::json;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("io_error", "cannot create directory: " + dir);
}

namespace {

void write_row(std::ofstream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << cells[i];
    }
    out << '\n';
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

}  // namespace

void write_run_csvs(const RunResult& run, const std::string& dir) {
    ensure_directory(dir);
    {
        std::ofstream out(dir + "/stage1.csv");
        if (!out) throw Error("io_error", "cannot write stage1.csv in " + dir);
        out << "k,t_s,truth_x_m,truth_y_m,truth_z_m,truth_vx_ms,truth_vy_ms,truth_vz_ms,"
               "los_x,los_y,los_z,u_x_ms,u_y_ms,u_z_ms,estimate_valid,"
               "x0hat_x_m,x0hat_y_m,x0hat_z_m,x0hat_vx_ms,x0hat_vy_ms,x0hat_vz_ms,"
               "err_norm_m,lam_max_pos_m2,lam_max_vel_m2s2,kappa,cond_A,residual,transitioned\n";
        for (const auto& r : run.stage1) {
            std::vector<std::string> cells;
            cells.push_back(std::to_string(r.k));
            cells.push_back(format_double(r.t));
            for (int i = 0; i < 6; ++i) cells.push_back(format_double(r.truth[i]));
            for (int i = 0; i < 3; ++i) cells.push_back(format_double(r.los[i]));
            for (int i = 0; i < 3; ++i) cells.push_back(format_double(r.u[i]));
            cells.push_back(r.estimate_valid ? "1" : "0");
            for (int i = 0; i < 6; ++i) cells.push_back(format_double(r.x0_hat[i]));
            cells.push_back(format_double(r.err_norm));
            cells.push_back(format_double(r.lam_max_pos));
            cells.push_back(format_double(r.lam_max_vel));
            cells.push_back(format_double(r.kappa));
            cells.push_back(format_double(r.cond_A));
            cells.push_back(format_double(r.residual));
            cells.push_back(r.transitioned ? "1" : "0");
            write_row(out, cells);
        }
    }
    {
        std::ofstream out(dir + "/stage2.csv");
        if (!out) throw Error("io_error", "cannot write stage2.csv in " + dir);
        out << "t_s,truth_x_m,truth_y_m,truth_z_m,truth_vx_ms,truth_vy_ms,truth_vz_ms,"
               "est_x_m,est_y_m,est_z_m,est_vx_ms,est_vy_ms,est_vz_ms,"
               "P_xx,P_yy,P_zz,P_vxvx,P_vyvy,P_vzvz,u_x_ms,u_y_ms,u_z_ms,mpc_status,nees\n";
        for (const auto& r : run.stage2) {
            std::vector<std::string> cells;
            cells.push_back(format_double(r.t));
            for (int i = 0; i < 6; ++i) cells.push_back(format_double(r.truth[i]));
            for (int i = 0; i < 6; ++i) cells.push_back(format_double(r.estimate[i]));
            for (int i = 0; i < 6; ++i) cells.push_back(format_double(r.p_diag[i]));
            for (int i = 0; i < 3; ++i) cells.push_back(format_double(r.u[i]));
            cells.push_back(std::to_string(r.mpc_status));
            cells.push_back(format_double(r.nees));
            write_row(out, cells);
        }
    }
}

std::string run_summary_json(const Scenario& sc, const RunResult& run, std::uint64_t run_seed) {
    json j;
    j["schema_version"] = 1;
    j["scenario"] = sc.name;
    j["seed"] = run_seed;
    j["n_measurements"] = run.n_measurements;
    j["transition_k"] = run.transition_k;
    j["no_transition"] = run.no_transition;
    j["t_handover_s"] = run.t_handover;
    j["rmae_percent"] = run.rmae_valid ? json(run.rmae_percent) : json(nullptr);
    j["stage2_ran"] = run.stage2_ran;
    j["terminal_pos_err_m"] = run.terminal_pos_err;
    j["terminal_vel_err_ms"] = run.terminal_vel_err;
    j["reach_time_s"] = run.reach_time;
    j["wall_stage1_s"] = run.wall_stage1_s;
    j["wall_stage2_s"] = run.wall_stage2_s;
    return j.dump(2) + "\n";
}

void write_run(const Scenario& sc, const RunResult& run, std::uint64_t run_seed,
               const std::string& dir) {
    write_run_csvs(run, dir);
    std::ofstream out(dir + "/summary.json");
    if (!out) throw Error("io_error", "cannot write summary.json in " + dir);
    out << run_summary_json(sc, run, run_seed);
}

std::string campaign_summary_json(const Scenario& sc, const CampaignSummary& s) {
    json j;
    j["schema_version"] = 1;
    j["scenario"] = sc.name;
    j["runs"] = s.runs;
    j["rmae_median_percent"] = s.rmae_count > 0 ? json(s.rmae_median) : json(nullptr);
    j["rmae_mad_percent"] = s.rmae_count > 0 ? json(s.rmae_mad) : json(nullptr);
    j["rmae_count"] = s.rmae_count;
    j["transitions"] = s.transitions;
    j["transition_ks"] = s.transition_ks;
    j["cheb_containment"] = s.cheb_containment;
    j["cheb_total"] = s.cheb_total;
    j["kappa_median_per_k"] = s.kappa_median_per_k;
    j["lam_pos_median_per_k"] = s.lam_pos_median_per_k;
    j["lam_vel_median_per_k"] = s.lam_vel_median_per_k;
    j["reached_count"] = s.reached_count;
    j["terminal_pos_median_m"] = s.terminal_pos_median;
    j["terminal_vel_median_ms"] = s.terminal_vel_median;
    j["mean_max_station_dev_m"] = s.mean_max_station_dev;
    return j.dump(2) + "\n";
}

void write_campaign(const Scenario& sc, const std::vector<RunResult>& results,
                    const CampaignSummary& summary, const std::string& dir,
                    bool per_run_traces) {
    ensure_directory(dir);
    if (per_run_traces) {
        for (std::size_t m = 0; m < results.size(); ++m) {
            char sub[32];
            std::snprintf(sub, sizeof(sub), "run_%04zu", m);
            write_run(sc, results[m], campaign_run_seed(sc.seed, static_cast<int>(m)),
                      dir + "/" + sub);
        }
    }
    std::ofstream out(dir + "/campaign_summary.json");
    if (!out) throw Error("io_error", "cannot write campaign_summary.json in " + dir);
    out << campaign_summary_json(sc, summary);
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& axis,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("io_error", "cannot write sweep table: " + path);
    out << axis
        << ",rmae_median_percent,rmae_mad_percent,transitions,runs,"
           "mean_max_station_dev_m,reached_count\n";
    for (const auto& row : rows) {
        std::vector<std::string> cells;
        cells.push_back(format_double(row.value));
        cells.push_back(format_double(row.summary.rmae_median));
        cells.push_back(format_double(row.summary.rmae_mad));
        cells.push_back(std::to_string(row.summary.transitions));
        cells.push_back(std::to_string(row.summary.runs));
        cells.push_back(format_double(row.summary.mean_max_station_dev));
        cells.push_back(std::to_string(row.summary.reached_count));
        write_row(out, cells);
    }
}

ReportMetrics report_from_run_dir(const std::string& dir, const State6& x0_true, int n_i) {
    ReportMetrics m;
    std::ifstream in(dir + "/stage1.csv");
    if (!in) throw Error("io_error", "cannot open " + dir + "/stage1.csv");
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::pair<int, Vec6>> estimates;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() < 28) throw Error("io_error", "malformed stage1.csv row");
        const int k = std::stoi(cells[0]);
        const bool valid = cells[14] == "1";
        if (valid) {
            Vec6 x0;
            for (int i = 0; i < 6; ++i) x0[i] = std::stod(cells[15 + i]);
            estimates.emplace_back(k, x0);
        }
        if (cells[27] == "1") m.transition_k = k;
    }
    const RmaeMetric metric = rmae(estimates, x0_true, n_i);
    if (metric.n_terms > 0) {
        m.rmae_percent = metric.value_percent;
        m.rmae_valid = true;
    }

    std::ifstream in2(dir + "/stage2.csv");
    if (in2) {
        std::getline(in2, line);
        std::vector<std::string> last;
        while (std::getline(in2, line)) {
            if (!line.empty()) last = split_csv_line(line);
        }
        if (!last.empty() && last.size() >= 24) {
            m.stage2_present = true;
            Vec3 r(std::stod(last[1]), std::stod(last[2]), std::stod(last[3]));
            Vec3 v(std::stod(last[4]), std::stod(last[5]), std::stod(last[6]));
            m.terminal_pos_err = r.norm();
            m.terminal_vel_err = v.norm();
        }
    }
    return m;
}

}  // namespace relnav
