#include "fmon/numerics.hpp"

#include <Eigen/Eigenvalues>

namespace fmon {

EigenFrame diagonalize(const Mat& a) {
    Eigen::ComplexEigenSolver<Mat> es(a);
    if (es.info() != Eigen::Success) throw Error("non-diagonalizable", "eigen solver failed");
    EigenFrame f{es.eigenvalues(), es.eigenvectors(), Mat()};
    Eigen::FullPivLU<Mat> lu(f.vectors);
    if (!lu.isInvertible() || lu.rcond() < 1e-10) throw Error("non-diagonalizable", "eigenvector matrix is singular");
    f.inverse = lu.inverse();
    return f;
}

double segment_distance(cplx a, cplx b, cplx p) {
    cplx d = b - a;
    double L2 = std::norm(d);
    if (L2 == 0.0) return std::abs(p - a);
    double t = std::clamp(((p - a) * std::conj(d)).real() / L2, 0.0, 1.0);
    return std::abs(p - (a + t * d));
}

std::vector<cplx> arc_points(cplx centre, double radius, double a0, double a1, double max_turn) {
    int n = std::max(1, int(std::ceil(std::abs(a1 - a0) / max_turn)));
    std::vector<cplx> pts;
    for (int k = 0; k <= n; ++k) pts.push_back(centre + radius * std::exp(I1 * (a0 + (a1 - a0) * k / n)));
    return pts;
}

double inverse_condition(const Mat& a) {
    Eigen::JacobiSVD<Mat> svd(a);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0.0;
    return sv(sv.size() - 1) / sv(0);
}

}  // namespace fmon
