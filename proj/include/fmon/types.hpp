#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmon {

using cplx = std::complex<double>;

template <class T>
using CMatrix = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using CVector = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, 1>;

using Mat = CMatrix<double>;
using Vec = CVector<double>;

inline constexpr double pi = 3.14159265358979323846;
inline const cplx I1{0.0, 1.0};

// a point together with a chosen value of the log of the relevant quantity
struct LogBranchPoint {
    cplx lambda;
    cplx log_value;
};

inline LogBranchPoint principal(cplx z) { return {z, std::log(z)}; }

struct Error : std::runtime_error {
    std::string kind;
    Error(std::string k, const std::string& what) : std::runtime_error(k + ": " + what), kind(std::move(k)) {}
};

inline double max_abs(const Mat& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace fmon
