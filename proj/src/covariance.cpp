#include "relnav/covariance.hpp"

#include <cmath>

#include "relnav/measurement.hpp"

namespace relnav {

std::vector<Mat63> sensitivity_matrices(const IrodSystem& system,
                                        const IrodSolution& solution) {
    const int n = system.n_obs;
    const int rows = 3 * (n - 2);
    const Eigen::VectorXd& k = solution.k;

    // C J applied through the pseudoinverse: G = C J (A^T A)^{-1} A^T, 6 x rows.
    Mat62 CJ;
    CJ.col(0).head<3>() = system.los0;
    CJ.col(0).tail<3>() = -system.stm_rv_T_inv * system.stm_rr_T * system.los0;
    CJ.col(1).head<3>() = Vec3::Zero();
    CJ.col(1).tail<3>() = system.stm_rv_T_inv * system.los1;

    const Eigen::MatrixXd normal_inv = normal_matrix_inverse(system.A);
    const Eigen::MatrixXd G = CJ * normal_inv.topRows(2) * system.A.transpose();

    std::vector<Mat63> S(n);

    // dC/dLOS0 contracted with J k, and the column-0 coefficients of A.
    Eigen::MatrixXd dA0(rows, 3);
    Eigen::MatrixXd dA1(rows, 3);
    for (int m = 2; m < n; ++m) {
        dA0.middleRows<3>(3 * (m - 2)) = k(0) * system.M1[m - 2];
        dA1.middleRows<3>(3 * (m - 2)) = k(1) * system.M2[m - 2];
    }
    Mat63 dC0;
    dC0.topRows<3>() = k(0) * Mat3::Identity();
    dC0.bottomRows<3>() = -k(0) * system.stm_rv_T_inv * system.stm_rr_T;
    Mat63 dC1;
    dC1.topRows<3>() = Mat3::Zero();
    dC1.bottomRows<3>() = k(1) * system.stm_rv_T_inv;

    S[0] = dC0 - G * dA0;
    S[1] = dC1 - G * dA1;
    for (int i = 2; i < n; ++i) {
        // LOS_i appears only in row block i with coefficient -k_i I, and not
        // in C, so the first term vanishes.
        S[i] = k(i) * G.middleCols<3>(3 * (i - 2));
    }
    return S;
}

Mat6 irod_covariance(const std::vector<Mat63>& sensitivities,
                     const std::vector<LosMeasurement>& measurements,
                     double sigma_theta) {
    Mat6 P = Mat6::Zero();
    for (std::size_t i = 0; i < sensitivities.size(); ++i) {
        const Mat3 sigma = measurement_covariance(measurements[i].los, sigma_theta);
        P += sensitivities[i] * sigma * sensitivities[i].transpose();
    }
    return symmetrize(P);
}

CovarianceReport normalize_and_analyze(const Mat6& P0, const OrbitParams& params) {
    CovarianceReport rep;
    rep.P0 = symmetrize(P0);

    const double L = params.a;
    const double V = params.n * params.a;
    Vec6 t_diag;
    t_diag << 1.0 / L, 1.0 / L, 1.0 / L, 1.0 / V, 1.0 / V, 1.0 / V;
    rep.P_norm = t_diag.asDiagonal() * rep.P0 * t_diag.asDiagonal();

    const Eigen::SelfAdjointEigenSolver<Mat6> eig(rep.P_norm);
    // PSD: eigenvalues coincide with singular values; reverse to descending.
    for (int i = 0; i < 6; ++i) {
        rep.singular_values(i) = std::abs(eig.eigenvalues()(5 - i));
    }
    const double smin = rep.singular_values(5);
    if (smin < 1e-300) {
        rep.kappa_infinite = true;
        rep.kappa = std::numeric_limits<double>::infinity();
    } else {
        rep.kappa = rep.singular_values(0) / smin;
    }

    const Eigen::SelfAdjointEigenSolver<Mat3> eig_rr(Mat3(rep.P0.topLeftCorner<3, 3>()));
    const Eigen::SelfAdjointEigenSolver<Mat3> eig_vv(Mat3(rep.P0.bottomRightCorner<3, 3>()));
    rep.lam_max_pos = eig_rr.eigenvalues().maxCoeff();
    rep.lam_max_vel = eig_vv.eigenvalues().maxCoeff();
    return rep;
}

bool transition_check(const CovarianceReport& report, const TransitionThresholds& thresholds) {
    return report.lam_max_pos < thresholds.sigma2_pos &&
           report.lam_max_vel < thresholds.sigma2_vel;
}

Mat6 propagate_covariance(const Mat6& P0, double dt, const Mat6& Q_rate,
                          const OrbitParams& params, double riemann_step) {
    if (dt < 0.0) {
        throw Error("invalid_step", "covariance propagation requires dt >= 0");
    }
    if (!(riemann_step > 0.0)) {
        throw Error("invalid_step", "Riemann step must be positive");
    }
    const Mat6 phi = cw_stm(dt, params).full();
    Mat6 P = phi * P0 * phi.transpose();

    if (dt > 0.0 && !Q_rate.isZero()) {
        const long steps = std::lround(std::ceil(dt / riemann_step - 1e-12));
        const double h = dt / static_cast<double>(steps);
        Mat6 q_int = Mat6::Zero();
        for (long i = 0; i < steps; ++i) {
            const double tau = static_cast<double>(i) * h;  // left endpoint
            const Mat6 phi_tau = cw_stm(dt - tau, params).full();
            q_int += phi_tau * Q_rate * phi_tau.transpose() * h;
        }
        P += q_int;
    }
    return symmetrize(P);
}

}  // namespace relnav
