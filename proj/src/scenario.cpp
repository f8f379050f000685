#include "relnav/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace relnav {

using nlohmann::json;

Mat6 EkfConfig::q_matrix() const {
    Vec6 d;
    d << q_pos, q_pos, q_pos, q_vel, q_vel, q_vel;
    return d.asDiagonal();
}

Mat3 EkfConfig::r_matrix(double sigma_theta, const Vec3& predicted_los) const {
    // Floor keeps the degenerate noiseless configuration functional.
    sigma_theta = std::max(sigma_theta, 1e-9);
    const double s2 = sigma_theta * sigma_theta;
    if (tangent_r) {
        // Tangent-plane covariance regularized along the boresight.
        return s2 * (Mat3::Identity() - predicted_los * predicted_los.transpose()) +
               1e-3 * s2 * Mat3::Identity();
    }
    return r_factor * s2 * Mat3::Identity();
}

DesignConfig Scenario::design_config() const {
    DesignConfig cfg;
    cfg.n_off = n_off;
    cfg.dt = T;
    cfg.gamma = design_gamma;
    cfg.rho = design_rho;
    cfg.tau = design_tau;
    cfg.epsilon = design_epsilon;
    cfg.q_track = design_q_diag.asDiagonal();
    // Thrust-level bound realized as an equivalent per-step impulse.
    const double impulse_bound = design_u_abs_max_accel * T;
    cfg.u_lower = Vec3::Constant(-impulse_bound);
    cfg.u_upper = Vec3::Constant(impulse_bound);
    for (const double off : design_sample_offsets) {
        State6 s = x0_nominal;
        s.r[0] += off;
        cfg.samples.push_back(s);
    }
    return cfg;
}

void Scenario::validate() const {
    orbit_params();
    if (!(T > 0.0)) throw Error("invalid_scenario", "epoch spacing must be positive");
    if (n_max < 2) throw Error("invalid_scenario", "n_max must cover at least 3 measurements");
    if (n_off < 2 || n_off > n_max) {
        throw Error("invalid_scenario", "n_off must satisfy 2 <= n_off <= n_max");
    }
    if (sigma_theta < 0.0) throw Error("invalid_scenario", "noise std must be nonnegative");
    if (!(thresholds.sigma2_pos > 0.0) || !(thresholds.sigma2_vel > 0.0)) {
        throw Error("invalid_scenario", "transition thresholds must be positive");
    }
    design_config().validate();
    mpc.validate();
}

std::vector<AdaptiveTier> braking_tiers(double u_max_outer, double u_max_inner,
                                        double inner_trigger, double v_cruise,
                                        double v_floor, double decel, double r_max) {
    std::vector<AdaptiveTier> tiers;
    double v = v_cruise;
    for (;;) {
        const double r_trigger = v * v / (2.0 * decel);
        const bool inner = r_trigger < inner_trigger;
        const double u_cap = inner ? u_max_inner : u_max_outer;
        // Tier-to-tier velocity drop one control step can absorb.
        const double dv = 0.7 * u_cap;
        const double v_next = std::max(v - dv, v_floor);
        tiers.push_back({r_trigger, u_cap, r_max, v_next});
        if (v_next <= v_floor) break;
        v = v_next;
    }
    return tiers;
}

namespace {

json vec3_to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec3_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw Error("invalid_scenario", "expected 3-vector");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

constexpr double kDegToRad = 0.017453292519943295;

}  // namespace

std::string scenario_to_json_text(const Scenario& sc) {
    json j;
    j["schema_version"] = sc.schema_version;
    j["name"] = sc.name;
    j["orbit"] = {{"mu_m3s2", sc.mu}, {"a_m", sc.a}};
    j["target_elements"] = {{"e", sc.elements.e},
                            {"inc_deg", sc.elements.inc / kDegToRad},
                            {"raan_deg", sc.elements.raan / kDegToRad},
                            {"argp_deg", sc.elements.argp / kDegToRad},
                            {"nu_deg", sc.elements.nu / kDegToRad}};
    j["truth_model"] = sc.truth == TruthKind::Keplerian ? "keplerian" : "linear";
    j["pipeline_mode"] = sc.mode == PipelineMode::Full ? "full" : "irod_only";
    j["x0_true"] = {{"r_m", vec3_to_json(sc.x0_true.r)}, {"v_ms", vec3_to_json(sc.x0_true.v)}};
    j["x0_nominal"] = {{"r_m", vec3_to_json(sc.x0_nominal.r)},
                       {"v_ms", vec3_to_json(sc.x0_nominal.v)}};
    j["T_s"] = sc.T;
    j["N_max"] = sc.n_max;
    j["N_off"] = sc.n_off;
    j["sigma_theta_rad"] = sc.sigma_theta;
    j["design"] = {{"gamma", sc.design_gamma},
                   {"rho", sc.design_rho},
                   {"tau", sc.design_tau},
                   {"epsilon", sc.design_epsilon},
                   {"q_track_diag",
                    json::array({sc.design_q_diag[0], sc.design_q_diag[1], sc.design_q_diag[2],
                                 sc.design_q_diag[3], sc.design_q_diag[4], sc.design_q_diag[5]})},
                   {"u_abs_max_ms2", sc.design_u_abs_max_accel},
                   {"sample_offsets_m", sc.design_sample_offsets},
                   {"pso_swarm", sc.pso_swarm},
                   {"pso_iters", sc.pso_iters}};
    j["thresholds"] = {{"sigma2_pos_m2", sc.thresholds.sigma2_pos},
                       {"sigma2_vel_m2s2", sc.thresholds.sigma2_vel}};
    j["ekf"] = {{"dt_s", sc.ekf.dt},
                {"q_pos_m2", sc.ekf.q_pos},
                {"q_vel_m2s2", sc.ekf.q_vel},
                {"r_factor", sc.ekf.r_factor},
                {"tangent_r", sc.ekf.tangent_r}};
    json tiers = json::array();
    for (const auto& t : sc.mpc.tiers) {
        tiers.push_back({{"range_trigger_m", t.range_trigger},
                         {"u_max_ms", t.u_max},
                         {"r_max_m", t.r_max},
                         {"v_max_ms", t.v_max}});
    }
    j["mpc"] = {{"horizon", sc.mpc.horizon},
                {"dt_s", sc.mpc.dt},
                {"w_pos", sc.mpc.w_pos},
                {"w_vel", sc.mpc.w_vel},
                {"w_u", sc.mpc.w_u},
                {"w_term", sc.mpc.w_term},
                {"u_max_ms", sc.mpc.u_max},
                {"r_max_m", sc.mpc.r_max},
                {"v_max_ms", sc.mpc.v_max},
                {"tol", sc.mpc.tol},
                {"max_iters", sc.mpc.max_iters},
                {"kp", sc.mpc.kp},
                {"kd", sc.mpc.kd},
                {"tiers", tiers}};
    j["stage2"] = {{"t_max_s", sc.stage2_t_max}};
    j["mc_runs"] = sc.mc_runs;
    j["seed"] = sc.seed;
    return j.dump(2) + "\n";
}

Scenario scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw Error("invalid_scenario", std::string("scenario parse failure: ") + e.what());
    }
    Scenario sc = default_scenario();
    sc.schema_version = j.value("schema_version", 1);
    if (sc.schema_version != 1) {
        throw Error("invalid_scenario", "unsupported scenario schema_version");
    }
    sc.name = j.value("name", sc.name);
    if (j.contains("orbit")) {
        sc.mu = j["orbit"].value("mu_m3s2", sc.mu);
        sc.a = j["orbit"].value("a_m", sc.a);
    }
    if (j.contains("target_elements")) {
        const auto& e = j["target_elements"];
        sc.elements.e = e.value("e", sc.elements.e);
        sc.elements.inc = e.value("inc_deg", sc.elements.inc / kDegToRad) * kDegToRad;
        sc.elements.raan = e.value("raan_deg", sc.elements.raan / kDegToRad) * kDegToRad;
        sc.elements.argp = e.value("argp_deg", sc.elements.argp / kDegToRad) * kDegToRad;
        sc.elements.nu = e.value("nu_deg", sc.elements.nu / kDegToRad) * kDegToRad;
    }
    sc.elements.a = sc.a;
    const std::string truth = j.value("truth_model", "keplerian");
    if (truth == "keplerian") {
        sc.truth = TruthKind::Keplerian;
    } else if (truth == "linear") {
        sc.truth = TruthKind::Linear;
    } else {
        throw Error("invalid_scenario", "truth_model must be keplerian or linear");
    }
    const std::string mode = j.value("pipeline_mode", "full");
    if (mode == "full") {
        sc.mode = PipelineMode::Full;
    } else if (mode == "irod_only") {
        sc.mode = PipelineMode::IrodOnly;
    } else {
        throw Error("invalid_scenario", "pipeline_mode must be full or irod_only");
    }
    if (j.contains("x0_true")) {
        sc.x0_true.r = vec3_from_json(j["x0_true"]["r_m"]);
        sc.x0_true.v = vec3_from_json(j["x0_true"]["v_ms"]);
    }
    if (j.contains("x0_nominal")) {
        sc.x0_nominal.r = vec3_from_json(j["x0_nominal"]["r_m"]);
        sc.x0_nominal.v = vec3_from_json(j["x0_nominal"]["v_ms"]);
    }
    sc.T = j.value("T_s", sc.T);
    sc.n_max = j.value("N_max", sc.n_max);
    sc.n_off = j.value("N_off", sc.n_off);
    sc.sigma_theta = j.value("sigma_theta_rad", sc.sigma_theta);
    if (j.contains("design")) {
        const auto& d = j["design"];
        sc.design_gamma = d.value("gamma", sc.design_gamma);
        sc.design_rho = d.value("rho", sc.design_rho);
        sc.design_tau = d.value("tau", sc.design_tau);
        sc.design_epsilon = d.value("epsilon", sc.design_epsilon);
        if (d.contains("q_track_diag")) {
            const auto& q = d["q_track_diag"];
            for (int i = 0; i < 6; ++i) sc.design_q_diag[i] = q[i].get<double>();
        }
        sc.design_u_abs_max_accel = d.value("u_abs_max_ms2", sc.design_u_abs_max_accel);
        if (d.contains("sample_offsets_m")) {
            sc.design_sample_offsets = d["sample_offsets_m"].get<std::vector<double>>();
        }
        sc.pso_swarm = d.value("pso_swarm", sc.pso_swarm);
        sc.pso_iters = d.value("pso_iters", sc.pso_iters);
    }
    if (j.contains("thresholds")) {
        sc.thresholds.sigma2_pos = j["thresholds"].value("sigma2_pos_m2", sc.thresholds.sigma2_pos);
        sc.thresholds.sigma2_vel = j["thresholds"].value("sigma2_vel_m2s2", sc.thresholds.sigma2_vel);
    }
    if (j.contains("ekf")) {
        const auto& e = j["ekf"];
        sc.ekf.dt = e.value("dt_s", sc.ekf.dt);
        sc.ekf.q_pos = e.value("q_pos_m2", sc.ekf.q_pos);
        sc.ekf.q_vel = e.value("q_vel_m2s2", sc.ekf.q_vel);
        sc.ekf.r_factor = e.value("r_factor", sc.ekf.r_factor);
        sc.ekf.tangent_r = e.value("tangent_r", sc.ekf.tangent_r);
    }
    if (j.contains("mpc")) {
        const auto& m = j["mpc"];
        sc.mpc.horizon = m.value("horizon", sc.mpc.horizon);
        sc.mpc.dt = m.value("dt_s", sc.mpc.dt);
        sc.mpc.w_pos = m.value("w_pos", sc.mpc.w_pos);
        sc.mpc.w_vel = m.value("w_vel", sc.mpc.w_vel);
        sc.mpc.w_u = m.value("w_u", sc.mpc.w_u);
        sc.mpc.w_term = m.value("w_term", sc.mpc.w_term);
        sc.mpc.u_max = m.value("u_max_ms", sc.mpc.u_max);
        sc.mpc.r_max = m.value("r_max_m", sc.mpc.r_max);
        sc.mpc.v_max = m.value("v_max_ms", sc.mpc.v_max);
        sc.mpc.tol = m.value("tol", sc.mpc.tol);
        sc.mpc.max_iters = m.value("max_iters", sc.mpc.max_iters);
        sc.mpc.kp = m.value("kp", sc.mpc.kp);
        sc.mpc.kd = m.value("kd", sc.mpc.kd);
        if (m.contains("tiers")) {
            sc.mpc.tiers.clear();
            if (m["tiers"].is_string() && m["tiers"].get<std::string>() == "auto") {
                sc.mpc.tiers = braking_tiers(sc.mpc.u_max, 0.5 * sc.mpc.u_max, 100.0,
                                             sc.mpc.v_max, 0.03, 0.035, sc.mpc.r_max);
            } else {
                for (const auto& t : m["tiers"]) {
                    sc.mpc.tiers.push_back({t.value("range_trigger_m", 0.0),
                                            t.value("u_max_ms", sc.mpc.u_max),
                                            t.value("r_max_m", sc.mpc.r_max),
                                            t.value("v_max_ms", sc.mpc.v_max)});
                }
            }
        }
    }
    if (j.contains("stage2")) {
        sc.stage2_t_max = j["stage2"].value("t_max_s", sc.stage2_t_max);
    }
    sc.mc_runs = j.value("mc_runs", sc.mc_runs);
    sc.seed = j.value("seed", sc.seed);
    sc.validate();
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open scenario file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json_text(ss.str());
}

void save_scenario(const Scenario& sc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("io_error", "cannot write scenario file: " + path);
    out << scenario_to_json_text(sc);
}

Scenario default_scenario() {
    Scenario sc;
    sc.name = "leo-vbar";
    sc.mu = kEarthMu;
    sc.a = 6.7901e6;
    sc.elements = OrbitalElements{sc.a, 0.001, 51.6455 * kDegToRad, 281.6522 * kDegToRad,
                                  37.3945 * kDegToRad, 322.7645 * kDegToRad};
    sc.x0_true.r = Vec3(4850.0, 0.0, 0.0);
    sc.x0_nominal.r = Vec3(5000.0, 0.0, 0.0);
    sc.mpc.tiers = braking_tiers(sc.mpc.u_max, 0.5 * sc.mpc.u_max, 100.0, sc.mpc.v_max,
                                 0.03, 0.035, sc.mpc.r_max);
    sc.seed = 42;
    return sc;
}

void apply_desk_profile(Scenario& sc) {
    // The optimizer is cheap here; only the campaign size needs trimming.
    sc.mc_runs = 20;
}

InputPlan plan_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw Error("invalid_plan", std::string("plan parse failure: ") + e.what());
    }
    if (j.value("schema_version", 1) != 1) {
        throw Error("invalid_plan", "unsupported plan schema_version");
    }
    InputPlan plan;
    plan.dt = j.value("T_s", 600.0);
    plan.objective = j.value("objective", 0.0);
    plan.provenance = provenance_from_string(j.value("provenance", "AL"));
    plan.seed = j.value("seed", std::uint64_t{0});
    for (const auto& u : j.at("u_ms")) {
        plan.u.push_back(vec3_from_json(u));
    }
    if (plan.u.empty() || plan.u.front().norm() != 0.0) {
        throw Error("invalid_plan", "plan must start with a zero first input");
    }
    return plan;
}

std::string plan_to_json_text(const InputPlan& plan) {
    json j;
    j["schema_version"] = 1;
    j["T_s"] = plan.dt;
    j["objective"] = plan.objective;
    j["provenance"] = to_string(plan.provenance);
    j["seed"] = plan.seed;
    json u = json::array();
    for (const auto& uk : plan.u) u.push_back(vec3_to_json(uk));
    j["u_ms"] = u;
    return j.dump(2) + "\n";
}

InputPlan load_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open plan file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return plan_from_json_text(ss.str());
}

void save_plan(const InputPlan& plan, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("io_error", "cannot write plan file: " + path);
    out << plan_to_json_text(plan);
}

}  // namespace relnav
