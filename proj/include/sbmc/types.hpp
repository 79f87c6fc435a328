#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace sbmc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown when an operation receives out-of-range or inconsistent parameters.
class parameter_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a trajectory leaves the representable range.
class simulation_error : public std::runtime_error {
public:
    simulation_error(const std::string& what, long step)
        : std::runtime_error(what), step_index(step) {}
    long step_index;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw parameter_error(msg);
}

/// Spectral (operator 2-) norm; matrices here are at most a few rows.
inline double operator_norm(const Mat& m) {
    if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

} // namespace sbmc
