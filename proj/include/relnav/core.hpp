#ifndef RELNAV_CORE_HPP
#define RELNAV_CORE_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>

namespace relnav {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;
using Mat62 = Eigen::Matrix<double, 6, 2>;

/// Fault with a stable machine-readable code alongside the human message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

inline Mat6 symmetrize(const Mat6& m) { return 0.5 * (m + m.transpose()); }

}  // namespace relnav

#endif
