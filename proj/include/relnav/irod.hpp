#ifndef RELNAV_IROD_HPP
#define RELNAV_IROD_HPP

#include <vector>

#include "relnav/core.hpp"
#include "relnav/dynamics.hpp"
#include "relnav/measurement.hpp"

namespace relnav {

/// Stacked range-factor system A_N k = B_N built from N equally spaced LOS
/// observations and the known impulse history.
struct IrodSystem {
    Eigen::MatrixXd A;  ///< 3(N-2) x N
    Eigen::VectorXd B;  ///< 3(N-2)
    int n_obs = 0;      ///< N
    double period = 0.0;

    // Coefficient matrices reused by the covariance propagation:
    // row block m (observation index m = 2..N-1) of column 0 is M1[m-2] los0,
    // of column 1 is M2[m-2] los1.
    std::vector<Mat3> M1;
    std::vector<Mat3> M2;
    Vec3 los0 = Vec3::Zero();
    Vec3 los1 = Vec3::Zero();
    Mat3 stm_rv_T_inv = Mat3::Zero();
    Mat3 stm_rr_T = Mat3::Zero();
};

struct IrodSolution {
    Eigen::VectorXd k;      ///< range factors [m]
    State6 x0_hat;
    double residual_norm = 0.0;
    double condition_A = 0.0;
};

struct ObservabilityResult {
    bool observable = false;
    double margin = 0.0;  ///< smallest singular value of W, 0 when unobservable
};

/// Assemble the least-squares system. Requires N >= 3 equally spaced
/// measurements whose spacing matches the impulse period. Faults when the
/// one-period position/velocity coupling block is singular (epoch spacing at
/// a multiple of the half orbital period).
IrodSystem build_system(const std::vector<LosMeasurement>& measurements,
                        const ImpulseSequence& u, const OrbitParams& params);

/// Solve for the range factors by orthogonal factorization; fills residual
/// and condition diagnostics, leaves x0_hat zero. Raises
/// "scale_ambiguity_unresolved" when A_N is numerically rank deficient.
IrodSolution solve_scale_factors(const IrodSystem& system);

/// Initial state from the first two range factors.
State6 reconstruct_initial_state(double k0, double k1, const Vec3& los0,
                                 const Vec3& los1, const StmSet& stm_T);

/// Full pipeline step: build, solve, reconstruct.
IrodSolution solve_irod(const std::vector<LosMeasurement>& measurements,
                        const ImpulseSequence& u, const OrbitParams& params);

/// Three-observation observability test: W = [M1 los0, M2 los1, -los2] must
/// be nonsingular and the first impulse must leave the span of the unforced
/// dynamics directions.
ObservabilityResult observability_margin(const Vec3& los0, const Vec3& los1,
                                         const Vec3& los2, const Vec3& u1,
                                         const StmSet& stm_T, const StmSet& stm_2T);

/// (A^T A)^{-1} from the QR factorization of A (shared helper; avoids forming
/// normal equations).
Eigen::MatrixXd normal_matrix_inverse(const Eigen::MatrixXd& A);

}  // namespace relnav

#endif
