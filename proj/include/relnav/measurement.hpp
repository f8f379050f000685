#ifndef RELNAV_MEASUREMENT_HPP
#define RELNAV_MEASUREMENT_HPP

#include <utility>
#include <vector>

#include "relnav/core.hpp"
#include "relnav/dynamics.hpp"
#include "relnav/rng.hpp"

namespace relnav {

/// Unit line-of-sight vector in LVLH with its epoch.
struct LosMeasurement {
    Vec3 los = Vec3::UnitX();
    int epoch_index = 0;
    double epoch_time = 0.0;
};

struct NoiseModel {
    double sigma_theta = 0.0;  ///< angular noise std dev [rad]
    std::uint64_t seed = 0;
};

/// r / ||r||; faults on zero position.
Vec3 los_from_state(const State6& x);

/// (azimuth, elevation); azimuth conventionally 0 at the poles.
std::pair<double, double> angles_from_los(const Vec3& los);

Vec3 los_from_angles(double az, double el);

/// Exact rotation of the true direction by theta ~ N(0, sigma^2) about a
/// uniformly random axis in the tangent plane. Output is exactly unit norm.
Vec3 perturb_los(const Vec3& true_los, double sigma_theta, Rng& rng);

/// Tangent-plane covariance sigma^2 (I - los los^T).
Mat3 measurement_covariance(const Vec3& los, double sigma_theta);

}  // namespace relnav

#endif
