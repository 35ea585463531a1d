#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fmon/frobenius.hpp"
#include "fmon/numerics.hpp"

#include <cstdio>
#include <random>

using namespace fmon;

TEST_CASE("P1 built-in data") {
    FrobeniusModel m = qh_projective_space(1, 1.0);
    Mat ap = m.mult[1];
    CHECK(ap(1, 0) == 1.0);
    CHECK(ap(0, 1) == 1.0);
    Mat e(2, 2);
    e << 0, 2, 2, 0;
    CHECK(max_abs(m.euler_mult - e) == 0.0);
    CHECK(max_abs(m.theta * m.rho - m.rho * m.theta + m.rho) == 0.0);
    CHECK(m.rho(1, 0) == 2.0);
    SemisimpleData s = canonical_data(m);
    CHECK(std::abs(s.u(0) + 2.0) < 1e-14);
    CHECK(std::abs(s.u(1) - 2.0) < 1e-14);
}

TEST_CASE("P2 eigenvalues by radicals") {
    for (cplx q : {cplx(1.0), std::exp(0.2 * I1)}) {
        FrobeniusModel m = qh_projective_space(2, q);
        SemisimpleData s = canonical_data(m);
        // roots of x^3 = 27 q
        for (int k = 0; k < 3; ++k) {
            cplx r = 3.0 * std::pow(q, 1.0 / 3) * std::exp(2.0 * pi * I1 * double(k) / 3.0);
            double best = 1e9;
            for (int i = 0; i < 3; ++i) best = std::min(best, std::abs(s.u(i) - r));
            CHECK(best < 1e-12);
        }
    }
    SemisimpleData s = canonical_data(qh_projective_space(2, std::exp(0.2 * I1)));
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) CHECK(std::abs(s.u(i).real() - s.u(j).real()) > 1e-3);
}

TEST_CASE("model invariants") {
    for (int n = 1; n <= 4; ++n) {
        cplx q = std::exp(0.3 * I1);
        FrobeniusModel m = qh_projective_space(n, q);
        for (const auto& c : model_checks(m)) CHECK_MESSAGE(c.pass(), c.name);
        Mat a = Mat::Identity(n + 1, n + 1);
        for (int k = 0; k <= n; ++k) a = a * m.mult[1];
        CHECK(max_abs(a - q * Mat::Identity(n + 1, n + 1)) == 0.0);
    }
}

TEST_CASE("model file round trip and rejection") {
    FrobeniusModel m = qh_projective_space(1, 1.0);
    std::string path = "fmon_test_model.json";
    save_model(m, path);
    FrobeniusModel r = load_model(path);
    std::remove(path.c_str());
    CHECK(max_abs(r.pairing - m.pairing) == 0.0);
    CHECK(max_abs(r.theta - m.theta) == 0.0);
    CHECK(max_abs(r.rho - m.rho) == 0.0);
    CHECK(max_abs(r.euler_mult - m.euler_mult) == 0.0);
    for (int i = 0; i < 2; ++i) CHECK(max_abs(r.mult[i] - m.mult[i]) == 0.0);
    REQUIRE(r.calibration.size() == m.calibration.size());
    for (std::size_t k = 0; k < m.calibration.size(); ++k) CHECK(max_abs(r.calibration[k] - m.calibration[k]) == 0.0);

    // bit exact text round trip with awkward values
    FrobeniusModel p = qh_projective_space(2, std::exp(0.2 * I1));
    std::string t = model_to_text(p);
    CHECK(model_to_text(model_from_text(t)) == t);

    FrobeniusModel bad = m;
    bad.pairing(0, 1) = 2.0;
    try {
        model_from_text(model_to_text(bad));
        FAIL("accepted a non-symmetric pairing");
    } catch (const Error& e) {
        CHECK(e.kind == "F1");
    }
    bad = m;
    bad.mult[0](0, 0) = 2.0;
    try {
        model_from_text(model_to_text(bad));
        FAIL("accepted a broken unit");
    } catch (const Error& e) {
        CHECK(e.kind == "F3");
    }
    CHECK_THROWS_AS(model_from_text("{\"dim\": 2}"), Error);
}

TEST_CASE("canonical data") {
    for (int n = 1; n <= 3; ++n) {
        FrobeniusModel m = qh_projective_space(n, n == 1 ? cplx(1.0) : std::exp(0.2 * I1));
        SemisimpleData s = canonical_data(m);
        CHECK(max_abs(s.psi.transpose() * m.pairing * s.psi - Mat::Identity(n + 1, n + 1)) < 1e-10);
        CHECK(max_abs(m.euler_mult * s.psi - s.psi * s.u.asDiagonal()) < 1e-10);
        for (int i = 0; i <= n; ++i) {
            Eigen::Index k;
            s.psi.col(i).cwiseAbs().maxCoeff(&k);
            double a = std::arg(s.psi(k, i));
            CHECK((a > -pi / 2 - 1e-12 && a <= pi / 2 + 1e-12));
        }
    }
}

namespace {

// J = sum_d q^d / prod_{k<=d} (p + k z)^{n+1}; coefficient of p^j z^-s
cplx j_coefficient(int n, cplx q, int j, int s) {
    // s = (n+1) d + j
    if (s < j || (s - j) % (n + 1)) return 0.0;
    int d = (s - j) / (n + 1);
    // coefficient of x^j in prod_{k=1}^d (k + x)^{-(n+1)}
    std::vector<double> c(j + 1, 0.0);
    c[0] = 1.0;
    for (int k = 1; k <= d; ++k) {
        std::vector<double> f(j + 1);
        double binom = 1.0;
        for (int t = 0; t <= j; ++t) {
            if (t) binom = binom * (n + t) / t;
            f[t] = binom * std::pow(-1.0 / k, t) / std::pow(double(k), n + 1);
        }
        std::vector<double> r(j + 1, 0.0);
        for (int a = 0; a <= j; ++a)
            for (int b = 0; a + b <= j; ++b) r[a + b] += c[a] * f[b];
        c = r;
    }
    return std::pow(q, d) * c[j];
}

}  // namespace

TEST_CASE("calibration against the J-function") {
    for (int n = 1; n <= 3; ++n) {
        cplx q = n == 1 ? cplx(1.0) : std::exp(0.2 * I1);
        FrobeniusModel m = qh_projective_space(n, q);
        auto S = calibration_series(m, 12);
        CHECK(max_abs(S[0] - Mat::Identity(n + 1, n + 1)) == 0.0);
        // k = 1 term of sum_a (-1)^a S_a^* S_{k-a}: S_1 - S_1^* = 0
        CHECK(max_abs(S[1] - adjoint(m, S[1])) < 1e-14);
        for (int k = 0; k <= 6; ++k) {
            Vec col = adjoint(m, S[k]).col(0);
            for (int j = 0; j <= n; ++j) CHECK(std::abs(col(j) - j_coefficient(n, q, j, k)) < 1e-9);
        }
        for (int k = 1; k <= 12; ++k) CHECK(symplectic_residual(m, S, k) < 1e-10);
    }
}

TEST_CASE("QDE flatness") {
    std::mt19937 gen(2);
    std::uniform_real_distribution<double> r(1, 10), a(-pi, pi);
    for (int n = 1; n <= 3; ++n) {
        FrobeniusModel m = qh_projective_space(n, std::exp(0.2 * I1));
        auto S = calibration_series(m, 70);
        for (int k = 0; k < 5; ++k) CHECK(qde_residual(m, S, std::polar(r(gen), a(gen))) < 1e-8);
    }
}

TEST_CASE("user model calibration by recursion") {
    // non-resonant toy model: theta with non-integer gaps, rho = 0
    FrobeniusModel m;
    m.dim = 2;
    m.pairing = Mat::Zero(2, 2);
    m.pairing(0, 1) = m.pairing(1, 0) = 1.0;
    m.theta = Mat::Zero(2, 2);
    m.theta(0, 0) = 0.3;
    m.theta(1, 1) = -0.3;
    m.rho = Mat::Zero(2, 2);
    Mat a = Mat::Zero(2, 2);
    a(1, 0) = 1.0;
    a(0, 1) = 1.0;
    m.mult = {Mat::Identity(2, 2), a};
    m.euler_mult = 2.0 * a;
    m.calibration = {Mat::Identity(2, 2)};
    auto S = calibration_series(m, 30);
    CHECK(qde_residual(m, S, 3.0) < 1e-10);
    // P^1 grading is resonant
    FrobeniusModel r = m;
    r.theta(0, 0) = 0.5;
    r.theta(1, 1) = -0.5;
    CHECK_THROWS_AS(calibration_series(r, 3), Error);
}

TEST_CASE("R-series") {
    FrobeniusModel m = qh_projective_space(1, 1.0);
    SemisimpleData s = canonical_data(m);
    auto R = rmatrix_series(m, s, 8);
    CHECK(max_abs(R[0] - Mat::Identity(2, 2)) == 0.0);
    // 2x2 by hand: Theta_01 = -Theta_10 = +-i/2, u = (-2, 2)
    CHECK(std::abs(std::abs(R[1](0, 1)) - 0.125) < 1e-14);
    CHECK(std::abs(R[1](0, 1) - R[1](1, 0)) < 1e-14);
    CHECK(std::abs(R[1](0, 1).real()) < 1e-14);
    CHECK(std::abs(R[1](0, 0) - 1.0 / 16) < 1e-14);
    CHECK(std::abs(R[1](1, 1) + 1.0 / 16) < 1e-14);
    Mat th = s.psi.partialPivLu().solve(m.theta * s.psi);
    CHECK(std::abs(R[1](1, 0) - th(1, 0) / (s.u(1) - s.u(0))) < 1e-14);

    for (int n = 1; n <= 3; ++n) {
        FrobeniusModel p = qh_projective_space(n, std::exp(0.2 * I1));
        SemisimpleData t = canonical_data(p);
        auto Rp = rmatrix_series(p, t, 10);
        for (int k = 1; k <= 10; ++k) {
            Mat acc = Mat::Zero(n + 1, n + 1);
            for (int a = 0; a <= k; ++a) acc += (a % 2 ? -1.0 : 1.0) * Rp[a].transpose() * Rp[k - a];
            CHECK(max_abs(acc) < 1e-10 * (1 + max_abs(Rp[k])));
        }
        // asymptotic order along a ray
        std::vector<Mat> R4(Rp.begin(), Rp.begin() + 5);
        cplx dir = std::exp(0.4 * I1);
        double r1 = asymptotic_residual(p, t, R4, 0.1 * dir), r2 = asymptotic_residual(p, t, R4, 0.05 * dir);
        CHECK(r1 >= 10 * r2);
    }
}
