#include "relnav/irod.hpp"

#include <cmath>

namespace relnav {

namespace {

Mat3 invert_rv_block(const Mat3& rv, double period) {
    Eigen::FullPivLU<Mat3> lu(rv);
    if (!lu.isInvertible()) {
        throw Error("singular_stm",
                    "position/velocity coupling block singular at T = " + std::to_string(period) +
                        " s; choose an epoch spacing away from half-orbit multiples");
    }
    return lu.inverse();
}

}  // namespace

IrodSystem build_system(const std::vector<LosMeasurement>& measurements,
                        const ImpulseSequence& u, const OrbitParams& params) {
    const int n = static_cast<int>(measurements.size());
    if (n < 3) {
        throw Error("too_few_observations", "at least 3 LOS observations required");
    }
    const double T = measurements[1].epoch_time - measurements[0].epoch_time;
    if (!(T > 0.0)) {
        throw Error("invalid_epochs", "observation epochs must be increasing");
    }
    for (int i = 1; i < n; ++i) {
        const double dt = measurements[i].epoch_time - measurements[i - 1].epoch_time;
        if (std::abs(dt - T) > 1e-6 * T) {
            throw Error("invalid_epochs", "observations must be equally spaced");
        }
    }
    if (!u.impulses.empty() && std::abs(u.period - T) > 1e-6 * T) {
        throw Error("invalid_epochs", "impulse period must equal the observation spacing");
    }

    const StmSet stm_T = cw_stm(T, params);
    const Mat3 rv_inv = invert_rv_block(stm_T.rv, T);

    IrodSystem sys;
    sys.n_obs = n;
    sys.period = T;
    sys.los0 = measurements[0].los;
    sys.los1 = measurements[1].los;
    sys.stm_rv_T_inv = rv_inv;
    sys.stm_rr_T = stm_T.rr;

    const int rows = 3 * (n - 2);
    sys.A = Eigen::MatrixXd::Zero(rows, n);
    sys.B = Eigen::VectorXd::Zero(rows);
    sys.M1.reserve(n - 2);
    sys.M2.reserve(n - 2);

    for (int m = 2; m < n; ++m) {
        const StmSet stm_m = cw_stm(m * T, params);
        const Mat3 M2 = stm_m.rv * rv_inv;
        const Mat3 M1 = stm_m.rr - M2 * stm_T.rr;
        sys.M1.push_back(M1);
        sys.M2.push_back(M2);

        const int row = 3 * (m - 2);
        sys.A.block<3, 1>(row, 0) = M1 * sys.los0;
        sys.A.block<3, 1>(row, 1) = M2 * sys.los1;
        sys.A.block<3, 1>(row, m) = -measurements[m].los;

        Vec3 b = Vec3::Zero();
        for (const auto& imp : u.impulses) {
            if (imp.index <= m) {
                b -= cw_stm((m - imp.index) * T, params).rv * imp.dv;
            }
        }
        sys.B.segment<3>(row) = b;
    }
    return sys;
}

Eigen::MatrixXd normal_matrix_inverse(const Eigen::MatrixXd& A) {
    // (A^T A)^{-1} = R^{-1} R^{-T} from the thin QR of A.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    const int ncols = static_cast<int>(A.cols());
    const Eigen::MatrixXd R =
        qr.matrixQR().topLeftCorner(ncols, ncols).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(ncols, ncols));
    return Rinv * Rinv.transpose();
}

IrodSolution solve_scale_factors(const IrodSystem& system) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(system.A);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smax > 0.0) || smin / smax < 1e-10) {
        throw Error("scale_ambiguity_unresolved",
                    "scale ambiguity unresolved: range-factor system is rank deficient "
                    "(no effective impulsive excitation)");
    }

    IrodSolution sol;
    sol.condition_A = smax / smin;
    sol.k = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(system.A).solve(system.B);
    sol.residual_norm = (system.A * sol.k - system.B).norm();
    return sol;
}

State6 reconstruct_initial_state(double k0, double k1, const Vec3& los0,
                                 const Vec3& los1, const StmSet& stm_T) {
    const Mat3 rv_inv = invert_rv_block(stm_T.rv, stm_T.dt);
    State6 x0;
    x0.r = k0 * los0;
    x0.v = rv_inv * (k1 * los1 - stm_T.rr * (k0 * los0));
    return x0;
}

IrodSolution solve_irod(const std::vector<LosMeasurement>& measurements,
                        const ImpulseSequence& u, const OrbitParams& params) {
    const IrodSystem sys = build_system(measurements, u, params);
    IrodSolution sol = solve_scale_factors(sys);
    const StmSet stm_T = cw_stm(sys.period, params);
    sol.x0_hat = reconstruct_initial_state(sol.k(0), sol.k(1), sys.los0, sys.los1, stm_T);
    return sol;
}

ObservabilityResult observability_margin(const Vec3& los0, const Vec3& los1,
                                         const Vec3& los2, const Vec3& u1,
                                         const StmSet& stm_T, const StmSet& stm_2T) {
    const Mat3 rv_inv = invert_rv_block(stm_T.rv, stm_T.dt);
    const Mat3 M2 = stm_2T.rv * rv_inv;
    const Mat3 M1 = stm_2T.rr - M2 * stm_T.rr;

    Mat3 W;
    W.col(0) = M1 * los0;
    W.col(1) = M2 * los1;
    W.col(2) = -los2;
    const Eigen::JacobiSVD<Mat3> svd(W);
    const double sigma_min = svd.singularValues()(2);
    const double sigma_max = svd.singularValues()(0);

    // Span condition on the first impulse: its component outside the plane of
    // the unforced directions must be nonzero. The residual of the projection
    // onto the span handles a degenerate (rank < 2) span as well.
    const Vec3 g0 = rv_inv * (M1 * los0);
    const Vec3 g1 = rv_inv * (M2 * los1);
    Eigen::Matrix<double, 3, 2> span;
    span.col(0) = g0;
    span.col(1) = g1;
    const Eigen::Vector2d coeff = span.colPivHouseholderQr().solve(u1);
    const double out_of_plane = (u1 - span * coeff).norm();

    constexpr double kTol = 1e-9;
    ObservabilityResult res;
    res.observable =
        sigma_min > 1e-12 * sigma_max && u1.norm() > 0.0 && out_of_plane > kTol * u1.norm();
    res.margin = res.observable ? sigma_min : 0.0;
    return res;
}

}  // namespace relnav
