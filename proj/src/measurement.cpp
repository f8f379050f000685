#include "relnav/measurement.hpp"

#include <cmath>

namespace relnav {

Vec3 los_from_state(const State6& x) {
    const double rnorm = x.r.norm();
    if (!(rnorm > 0.0)) {
        throw Error("zero_position", "line of sight undefined at zero relative position");
    }
    return x.r / rnorm;
}

std::pair<double, double> angles_from_los(const Vec3& los) {
    const double rho = std::hypot(los[0], los[1]);
    const double az = (rho > 0.0) ? std::atan2(los[1], los[0]) : 0.0;
    const double el = std::asin(std::clamp(los[2] / los.norm(), -1.0, 1.0));
    return {az, el};
}

Vec3 los_from_angles(double az, double el) {
    return Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
}

Vec3 perturb_los(const Vec3& true_los, double sigma_theta, Rng& rng) {
    if (sigma_theta == 0.0) return true_los;
    const double theta = sigma_theta * rng.normal();
    // Uniform axis in the tangent plane: project a random direction and
    // normalize, resampling on degenerate projections.
    Vec3 axis;
    for (;;) {
        const Vec3 g = rng.normal3();
        axis = g - g.dot(true_los) * true_los;
        const double norm = axis.norm();
        if (norm > 1e-12) {
            axis /= norm;
            break;
        }
    }
    // Rodrigues with axis orthogonal to the vector: exact unit output.
    return std::cos(theta) * true_los + std::sin(theta) * axis.cross(true_los);
}

Mat3 measurement_covariance(const Vec3& los, double sigma_theta) {
    return sigma_theta * sigma_theta * (Mat3::Identity() - los * los.transpose());
}

}  // namespace relnav
