#ifndef RELNAV_COVARIANCE_HPP
#define RELNAV_COVARIANCE_HPP

#include <vector>

#include "relnav/core.hpp"
#include "relnav/irod.hpp"

namespace relnav {

/// Analytical covariance products of a batch solution.
struct CovarianceReport {
    Mat6 P0 = Mat6::Zero();       ///< [m^2 | m^2/s | m^2/s^2]
    Mat6 P_norm = Mat6::Zero();   ///< dimensionless
    Vec6 singular_values = Vec6::Zero();  ///< descending
    double kappa = 0.0;
    bool kappa_infinite = false;
    double lam_max_pos = 0.0;  ///< max eigenvalue of the position block [m^2]
    double lam_max_vel = 0.0;  ///< max eigenvalue of the velocity block [m^2/s^2]
};

struct TransitionThresholds {
    double sigma2_pos = 0.0;  ///< [m^2]
    double sigma2_vel = 0.0;  ///< [m^2/s^2]
};

/// First-order sensitivities of the reconstructed initial state to each LOS
/// measurement. One 6x3 matrix per observation.
std::vector<Mat63> sensitivity_matrices(const IrodSystem& system,
                                        const IrodSolution& solution);

/// P0 = sum_i S_i Sigma_i S_i^T with the tangent-plane per-measurement
/// covariance; symmetrized on output.
Mat6 irod_covariance(const std::vector<Mat63>& sensitivities,
                     const std::vector<LosMeasurement>& measurements,
                     double sigma_theta);

/// Length/velocity normalization, spectrum, condition number and block
/// maxima (block maxima from the unnormalized matrix).
CovarianceReport normalize_and_analyze(const Mat6& P0, const OrbitParams& params);

bool transition_check(const CovarianceReport& report, const TransitionThresholds& thresholds);

/// Phi(dt) P0 Phi(dt)^T plus the integrated process noise, the integral
/// approximated by a left Riemann sum at the given step.
Mat6 propagate_covariance(const Mat6& P0, double dt, const Mat6& Q_rate,
                          const OrbitParams& params, double riemann_step);

}  // namespace relnav

#endif
