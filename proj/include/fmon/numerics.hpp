#pragma once

#include "fmon/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace fmon {

// truncated Taylor series in a small parameter eps
template <class T>
struct Jet {
    using S = std::complex<T>;
    std::vector<S> c;

    explicit Jet(std::size_t n = 1, S c0 = S(0)) : c(n, S(0)) { c[0] = c0; }
    static Jet variable(std::size_t n, S x0) {
        Jet j(n, x0);
        if (n > 1) j.c[1] = S(1);
        return j;
    }
    std::size_t size() const { return c.size(); }
    S operator[](std::size_t k) const { return c[k]; }

    Jet& operator+=(const Jet& o) {
        for (std::size_t k = 0; k < size(); ++k) c[k] += o.c[k];
        return *this;
    }
    Jet& operator*=(S s) {
        for (auto& x : c) x *= s;
        return *this;
    }
};

template <class T>
Jet<T> operator*(const Jet<T>& a, const Jet<T>& b) {
    Jet<T> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.c[i] == std::complex<T>(0)) continue;
        for (std::size_t j = 0; i + j < a.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
    }
    return r;
}

template <class T>
Jet<T> operator+(Jet<T> a, const Jet<T>& b) { return a += b; }

template <class T>
Jet<T> exp(const Jet<T>& g) {
    // f' = g' f
    Jet<T> f(g.size(), std::exp(g.c[0]));
    for (std::size_t k = 1; k < g.size(); ++k) {
        std::complex<T> s(0);
        for (std::size_t j = 1; j <= k; ++j) s += T(j) * g.c[j] * f.c[k - j];
        f.c[k] = s / T(k);
    }
    return f;
}

namespace detail {

// B_{2j} / (2j (2j-1)), j = 1..10
inline constexpr std::array<double, 10> stirling_coeffs = {
    1.0 / 12.0,          -1.0 / 360.0,         1.0 / 1260.0,         -1.0 / 1680.0,
    1.0 / 1188.0,        -691.0 / 360360.0,    1.0 / 156.0,          -3617.0 / 122400.0,
    43867.0 / 244188.0,  -174611.0 / 125400.0};

// log Gamma(w + eps) for Re w >= 12
template <class T>
Jet<T> lgamma_stirling(std::complex<T> w, std::size_t n) {
    using S = std::complex<T>;
    Jet<T> logw(n, std::log(w)), inv(n, S(1) / w);
    S p = S(1);
    for (std::size_t k = 1; k < n; ++k) {
        p /= w;
        logw.c[k] = (k % 2 ? T(1) : T(-1)) * p / T(k);
        inv.c[k] = (k % 2 ? T(-1) : T(1)) * p / w;
    }
    Jet<T> W = Jet<T>::variable(n, w);
    Jet<T> half = W;
    half.c[0] -= T(0.5);
    Jet<T> r = half * logw;
    r.c[0] += -w + T(0.5) * std::log(T(2) * T(pi));
    if (n > 1) r.c[1] -= T(1);
    Jet<T> inv2 = inv * inv, term = inv;
    for (double b : stirling_coeffs) {
        for (std::size_t k = 0; k < n; ++k) r.c[k] += T(b) * term.c[k];
        term = term * inv2;
    }
    return r;
}

}  // namespace detail

// Taylor coefficients of 1/Gamma(z + eps) up to eps^(order-1); entire, no pole handling
template <class T>
std::vector<std::complex<T>> rgamma_jet(std::complex<T> z, std::size_t order) {
    using S = std::complex<T>;
    int shift = 0;
    if (z.real() < 12) shift = int(std::ceil(12 - z.real()));
    Jet<T> lg = detail::lgamma_stirling<T>(z + T(shift), order);
    lg *= S(-1);
    Jet<T> r = exp(lg);
    // 1/Gamma(z) = z (z+1) ... (z+s-1) / Gamma(z+s)
    for (int j = 0; j < shift; ++j) r = r * Jet<T>::variable(order, z + T(j));
    return r.c;
}

template <class T>
std::complex<T> rgamma(std::complex<T> z) { return rgamma_jet(z, 1)[0]; }

template <class T>
std::complex<T> complex_gamma(std::complex<T> z) {
    if (z.real() < T(0.5)) {
        T k = std::round(-z.real());
        if (k >= 0 && std::abs(z + k) < T(1e-14))
            throw Error("pole", "Gamma has a pole at non-positive integer " + std::to_string(-long(k)));
        // sin(pi z) with the integer part removed first
        T n = std::round(z.real());
        std::complex<T> s = std::sin(T(pi) * (z - n));
        if (std::fmod(std::abs(n), T(2)) == T(1)) s = -s;
        return T(pi) * rgamma(T(1) - z) / s;
    }
    return T(1) / rgamma(z);
}

// exp of a nilpotent operator as a finite sum
template <class Derived>
auto nilpotent_exp(const Eigen::MatrixBase<Derived>& a) {
    using M = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::Index n = a.rows();
    M r = M::Identity(n, n), t = M::Identity(n, n);
    for (Eigen::Index l = 1; l <= n; ++l) {
        t = (t * a.derived()) / typename Derived::Scalar(double(l));
        r += t;
    }
    M top = t * a.derived();
    double scale = 1.0 + a.cwiseAbs().maxCoeff();
    if (top.cwiseAbs().maxCoeff() > 1e-10 * std::pow(scale, double(n + 1)))
        throw Error("not-nilpotent", "operator is not nilpotent within N steps");
    return r;
}

template <class Derived>
bool is_diagonal(const Eigen::MatrixBase<Derived>& a, double tol = 1e-14) {
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (i != j && std::abs(a(i, j)) > tol) return false;
    return true;
}

// theta = V diag(ev) V^-1
struct EigenFrame {
    Vec values;
    Mat vectors, inverse;
};
EigenFrame diagonalize(const Mat& a);

// lambda^theta lambda^-rho on the branch carried by lam
template <class DA, class DB>
Mat operator_power(const LogBranchPoint& lam, const Eigen::MatrixBase<DA>& theta,
                   const Eigen::MatrixBase<DB>& rho) {
    const cplx L = lam.log_value;
    const Eigen::Index n = theta.rows();
    Mat comm = theta * rho - rho * theta + rho;
    if (max_abs(comm) > 1e-12 * (1 + max_abs(rho)))
        throw Error("grading", "[theta, rho] != -rho");
    Mat left(n, n);
    if (is_diagonal(theta)) {
        left.setZero();
        for (Eigen::Index k = 0; k < n; ++k) left(k, k) = std::exp(cplx(theta(k, k)) * L);
    } else {
        EigenFrame f = diagonalize(theta);
        left = f.vectors * (f.values.array() * L).exp().matrix().asDiagonal() * f.inverse;
    }
    Mat r = Mat(-rho) * L;
    return left * nilpotent_exp(r);
}

// Itilde^(m)(lambda) = sum_l rho^l/l! d_x^l [exp((x-l-1/2) log lambda) / Gamma(x-l+1/2)] at x = theta - m
template <class DA, class DB>
Mat calibrated_period(const Eigen::MatrixBase<DA>& theta, const Eigen::MatrixBase<DB>& rho, cplx m,
                      const LogBranchPoint& lam) {
    const Eigen::Index n = theta.rows();
    if (!is_diagonal(theta)) {
        EigenFrame f = diagonalize(theta);
        Mat d = f.values.asDiagonal();
        Mat r = f.inverse * rho * f.vectors;
        return f.vectors * calibrated_period(d, r, m, lam) * f.inverse;
    }
    const cplx L = lam.log_value;
    std::vector<Mat> rp(1, Mat::Identity(n, n));
    for (Eigen::Index l = 1; l < n; ++l) rp.push_back(rp.back() * rho / double(l));
    Mat out = Mat::Zero(n, n);
    for (Eigen::Index b = 0; b < n; ++b) {
        for (Eigen::Index l = 0; l < n; ++l) {
            if (rp[l].col(b).cwiseAbs().maxCoeff() == 0.0) continue;
            const std::size_t ord = std::size_t(l) + 1;
            cplx x0 = cplx(theta(b, b)) - m - double(l);
            Jet<double> e(ord, std::exp((x0 - 0.5) * L));
            for (std::size_t k = 1; k < ord; ++k) e.c[k] = e.c[k - 1] * L / double(k);
            Jet<double> g(ord);
            g.c = rgamma_jet(x0 + 0.5, ord);
            Jet<double> h = e * g;
            double fact = std::tgamma(double(l) + 1);
            out.col(b) += rp[l].col(b) * (h.c[l] * fact);
        }
    }
    return out;
}

struct OdeOptions {
    double tol = 1e-10;
    std::vector<cplx> singularities;
    double min_clearance = 0.0;
    std::size_t max_steps = 2000000;
};

double segment_distance(cplx a, cplx b, cplx p);

// y' = rhs(lambda) y along a polyline, Dormand-Prince 5(4)
template <class Rhs>
Mat continue_linear_ode(Rhs&& rhs, const Mat& y0, const std::vector<cplx>& path, const OdeOptions& opt = {}) {
    static constexpr double c2 = 1. / 5, c3 = 3. / 10, c4 = 4. / 5, c5 = 8. / 9;
    static constexpr double a21 = 1. / 5;
    static constexpr double a31 = 3. / 40, a32 = 9. / 40;
    static constexpr double a41 = 44. / 45, a42 = -56. / 15, a43 = 32. / 9;
    static constexpr double a51 = 19372. / 6561, a52 = -25360. / 2187, a53 = 64448. / 6561, a54 = -212. / 729;
    static constexpr double a61 = 9017. / 3168, a62 = -355. / 33, a63 = 46732. / 5247, a64 = 49. / 176,
                            a65 = -5103. / 18656;
    static constexpr double b1 = 35. / 384, b3 = 500. / 1113, b4 = 125. / 192, b5 = -2187. / 6784, b6 = 11. / 84;
    static constexpr double e1 = 71. / 57600, e3 = -71. / 16695, e4 = 71. / 1920, e5 = -17253. / 339200,
                            e6 = 22. / 525, e7 = -1. / 40;

    for (std::size_t s = 0; s + 1 < path.size(); ++s)
        for (cplx u : opt.singularities)
            if (segment_distance(path[s], path[s + 1], u) < opt.min_clearance)
                throw Error("clearance", "path passes within min_clearance of a singular point");

    auto nearest = [&](cplx x) {
        double d = std::numeric_limits<double>::infinity();
        for (cplx u : opt.singularities) d = std::min(d, std::abs(x - u));
        return d;
    };
    auto colnorm = [](const Mat& a, Eigen::Index j) { return a.col(j).cwiseAbs().maxCoeff(); };

    Mat y = y0;
    std::size_t steps = 0;
    for (std::size_t s = 0; s + 1 < path.size(); ++s) {
        const cplx a = path[s], b = path[s + 1];
        const double len = std::abs(b - a);
        if (len <= 1e-14 * (1.0 + std::abs(a))) continue;
        const cplx dir = (b - a) / len;
        auto f = [&](double t, const Mat& v) -> Mat { return (rhs(a + t * dir) * dir) * v; };
        double t = 0.0, h = std::min(len, 0.05 * (1.0 + std::abs(a)));
        Mat k1 = f(0.0, y);
        while (t < len) {
            if (++steps > opt.max_steps) throw Error("step-underflow", "ODE step budget exhausted");
            double cap = 0.5 * nearest(a + t * dir);
            h = std::min({h, len - t, cap});
            if (h < 1e-14 * (1.0 + len)) throw Error("step-underflow", "ODE step size underflow near a singular point");
            Mat k2 = f(t + c2 * h, y + h * (a21 * k1));
            Mat k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
            Mat k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
            Mat k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            Mat k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            Mat yn = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            Mat k7 = f(t + h, yn);
            Mat err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            double en = 0.0;
            for (Eigen::Index j = 0; j < y.cols(); ++j) {
                double sc = std::max(colnorm(y, j), colnorm(yn, j));
                double ej = colnorm(err, j);
                if (ej > 0) en = std::max(en, ej / (opt.tol * std::max(sc, 1e-300)));
            }
            if (!std::isfinite(en)) en = 1e10;
            if (en <= 1.0) {
                t += h;
                y = std::move(yn);
                k1 = std::move(k7);
                if (len - t < 1e-13 * len) t = len;
            }
            double fac = en > 0 ? 0.9 * std::pow(en, -0.2) : 5.0;
            h *= std::clamp(fac, 0.2, 5.0);
        }
    }
    if (!y.allFinite()) throw Error("non-finite", "ODE solution is not finite");
    return y;
}

// smallest over largest singular value; 0 for a singular matrix
double inverse_condition(const Mat& a);

// polyline helpers
std::vector<cplx> arc_points(cplx centre, double radius, double a0, double a1, double max_turn = 5.0 * pi / 180);

}  // namespace fmon
