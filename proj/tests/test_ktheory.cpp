#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fmon/ktheory.hpp"
#include "fmon/periods.hpp"

#include <functional>
#include <random>

using namespace fmon;

namespace {

// number of monomials of degree d in v variables, by enumeration
std::int64_t count_monomials(int v, int d) {
    if (d < 0) return 0;
    if (v == 1) return 1;
    std::int64_t c = 0;
    for (int k = 0; k <= d; ++k) c += count_monomials(v - 1, d - k);
    return c;
}

// chi(O(d)) on P^n from h^0 and Serre duality (h^n(O(d)) = h^0(O(-d-n-1)))
std::int64_t chi_oracle(int n, int d) {
    std::int64_t top = count_monomials(n + 1, -d - n - 1);
    return count_monomials(n + 1, d) + (n % 2 ? -top : top);
}

KVec random_class(int n, std::mt19937& rng) {
    std::uniform_int_distribution<int> pick(-5, 5);
    KVec e(n + 1);
    for (auto& x : e) x = pick(rng);
    return e;
}

std::vector<MutationWord> all_words(int slots, int length) {
    std::vector<MutationWord> out{{}};
    std::vector<MutationWord> layer{{}};
    for (int l = 0; l < length; ++l) {
        std::vector<MutationWord> next;
        for (const auto& w : layer)
            for (int i = 0; i < slots; ++i)
                for (Side s : {Side::L, Side::R}) {
                    MutationWord x = w;
                    x.emplace_back(i, s);
                    next.push_back(x);
                }
        out.insert(out.end(), next.begin(), next.end());
        layer = next;
    }
    return out;
}

}  // namespace

TEST_CASE("chi pairing") {
    for (int n = 1; n <= 3; ++n)
        for (int a = -4; a <= 4; ++a) {
            CHECK(euler_chi(n, line_bundle(n, a), line_bundle(n, a)) == 1);
            for (int b = -4; b <= 4; ++b) {
                const std::int64_t want = chi_oracle(n, b - a);
                CHECK(euler_chi(n, line_bundle(n, a), line_bundle(n, b)) == want);
                CHECK(hrr_chi(n, line_bundle(n, a), line_bundle(n, b)) == want);
            }
        }
    CHECK(euler_chi(1, line_bundle(1, 0), line_bundle(1, 1)) == 2);
    KMat g2 = beilinson(2).gram();
    KMat want(3, 3);
    want << 1, 3, 6, 0, 1, 3, 0, 0, 1;
    CHECK(g2 == want);
    CHECK(binom_poly(-1, 2) == 1);
    CHECK(binom_poly(-3, 3) == -10);
}

TEST_CASE("line bundles and duals") {
    // the Koszul relation holds at every window
    for (int n = 1; n <= 3; ++n) {
        for (int a = -6; a <= 6; ++a) {
            KVec s = KVec::Zero(n + 1);
            for (int k = 0; k <= n + 1; ++k) s += (k % 2 ? -1 : 1) * binom_poly(n + 1, k) * line_bundle(n, a - k);
            CHECK(s.isZero());
            CHECK(dual_class(n, dual_class(n, line_bundle(n, a))) == line_bundle(n, a));
            CHECK(twist(n, line_bundle(n, a), 3) == line_bundle(n, a + 3));
        }
        // chi(E (x) K) = (-1)^n chi(E^vee)
        const KVec o = line_bundle(n, 0);
        for (int a = 0; a <= n; ++a) {
            KVec e = KVec::Unit(n + 1, a);
            std::int64_t lhs = euler_chi(n, o, twist(n, e, -(n + 1)));
            std::int64_t rhs = euler_chi(n, o, dual_class(n, e));
            CHECK(lhs == (n % 2 ? -rhs : rhs));
        }
    }
    KVec wrong(2);
    CHECK_THROWS_AS(euler_chi(2, wrong, wrong), Error);
}

TEST_CASE("mutations") {
    ExceptionalCollection p1 = beilinson(1);
    ExceptionalCollection l = mutate(p1, 0, Side::L);
    KVec want(2);
    want << -2, 1;
    CHECK(l.classes[0] == want);
    CHECK(l.classes[1] == p1.classes[0]);
    CHECK(mutate(l, 0, Side::R) == p1);
    CHECK_THROWS_AS(mutate(p1, 1, Side::L), Error);
    CHECK_THROWS_AS(mutate(p1, -1, Side::R), Error);

    // every word of length <= 4 on the P^2 collection
    ExceptionalCollection p2 = beilinson(2);
    int words = 0;
    for (const auto& w : all_words(2, 4)) {
        ExceptionalCollection c = apply_word(p2, w);
        ++words;
        CHECK(c.exceptional());
        CHECK(apply_word(c, {{0, Side::L}, {1, Side::L}, {0, Side::L}}) ==
              apply_word(c, {{1, Side::L}, {0, Side::L}, {1, Side::L}}));
        CHECK(apply_word(c, {{0, Side::R}, {1, Side::R}, {0, Side::R}}) ==
              apply_word(c, {{1, Side::R}, {0, Side::R}, {1, Side::R}}));
        for (int i = 0; i < 2; ++i) {
            CHECK(mutate(mutate(c, i, Side::L), i, Side::R) == c);
            CHECK(mutate(mutate(c, i, Side::R), i, Side::L) == c);
        }
        CHECK(apply_word(apply_word(c, inverse_word(w)), {}) == p2);
    }
    CHECK(words == 1 + 4 + 16 + 64 + 256);
    // far commuting generators on P^3
    ExceptionalCollection p3 = beilinson(3);
    CHECK(apply_word(p3, {{0, Side::L}, {2, Side::R}}) == apply_word(p3, {{2, Side::R}, {0, Side::L}}));
}

TEST_CASE("words") {
    MutationWord w = parse_word("L1 r2,L3");
    REQUIRE(w.size() == 3);
    CHECK(w[1].first == 1);
    CHECK(w[1].second == Side::R);
    CHECK(word_text(w) == "L1 R2 L3");
    CHECK(parse_word("").empty());
    CHECK_THROWS_AS(parse_word("X1"), Error);
    CHECK_THROWS_AS(parse_word("L0"), Error);
    CHECK_THROWS_AS(parse_word("L1x"), Error);
}

TEST_CASE("left Koszul dual") {
    for (int n = 0; n <= 3; ++n) {
        std::vector<ExceptionalCollection> colls{beilinson(n), beilinson(n, -2),
                                                 apply_word(beilinson(n), n >= 2 ? parse_word("L1 R2 L1") : MutationWord{})};
        for (const auto& c : colls) {
            const int N = int(c.size());
            ExceptionalCollection d = left_koszul_dual(c);
            CHECK(d.exceptional());
            // d = (E~_N, ..., E~_1)
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j)
                    CHECK(euler_chi(n, c.classes[i], d.classes[N - 1 - j]) == (i == j ? 1 : 0));
            // E~_i = L_{E_1} ... L_{E_{i-1}} E_i
            for (int i = 0; i < N; ++i) {
                KVec e = c.classes[i];
                for (int k = i - 1; k >= 0; --k) e -= euler_chi(n, c.classes[k], e) * c.classes[k];
                CHECK(d.classes[N - 1 - i] == e);
            }
            CHECK(apply_word(d, inverse_word(koszul_word(N))) == c);
        }
    }
    ExceptionalCollection one{2, {line_bundle(2, 1)}};
    CHECK(left_koszul_dual(one) == one);
}

TEST_CASE("helix") {
    for (int n = 1; n <= 3; ++n) {
        ExceptionalCollection c = beilinson(n);
        CHECK(helix_shift(c, 0) == c);
        CHECK(helix_shift(c, 1) == beilinson(n, 1));
        CHECK(helix_shift(c, -2) == beilinson(n, -2));
        CHECK(helix_shift(helix_shift(c, n + 1), -(n + 1)) == c);
        // a full turn twists by the anticanonical bundle
        CHECK(helix_shift(c, n + 1) == beilinson(n, n + 1));
        ExceptionalCollection m = apply_word(c, parse_word("L1"));
        CHECK(helix_shift(m, n + 1).gram() == m.gram());
    }
    CHECK(shifted(beilinson(1), 1).classes[0] == -line_bundle(1, 0));
    CHECK(shifted(beilinson(1), 2) == beilinson(1));
}

TEST_CASE("characteristic classes") {
    const double eg = 0.57721566490153286061;
    Vec o = chern_character(1, line_bundle(1, 0));
    CHECK(std::abs(o(0) - 1.0) < 1e-15);
    CHECK(std::abs(o(1)) < 1e-15);
    Vec c1 = chern_character(1, line_bundle(1, 1));
    CHECK(std::abs(c1(1) - 2 * pi * I1) < 1e-14);
    // Euler relation O(-1) - 2 O + O(1) = 0
    KVec rel = line_bundle(1, -1) - 2 * line_bundle(1, 0) + line_bundle(1, 1);
    CHECK(rel.isZero());
    // Ch(O(-1)) through the Koszul expansion equals the truncated e^{-2 pi i h}
    Vec m1 = chern_character(1, line_bundle(1, -1));
    CHECK(std::abs(m1(0) - 1.0) < 1e-14);
    CHECK(std::abs(m1(1) + 2 * pi * I1) < 1e-13);
    // classical ch(O(2)) on P^3 = 1 + 2h + 2h^2 + 4/3 h^3
    Vec c2 = chern_character(3, line_bundle(3, 2), false);
    CHECK(std::abs(c2(3) - 4.0 / 3) < 1e-14);

    Vec g = gamma_class(1, 1);
    CHECK(std::abs(g(1) + 2 * eg) < 1e-15);
    for (int n = 1; n <= 4; ++n) {
        Vec gp = gamma_class(n, 1), gm = gamma_class(n, -1);
        for (int k = 0; k <= n; ++k) CHECK(std::abs(gm(k) - (k % 2 ? -gp(k) : gp(k))) < 1e-15);
        // (pi h / sin pi h)^(n+1) from the sine series
        Vec s = Vec::Zero(n + 1), inv = Vec::Zero(n + 1);
        double f = 1.0;
        for (int k = 0; 2 * k <= n; ++k) {
            s(2 * k) = (k % 2 ? -1.0 : 1.0) * std::pow(pi, 2 * k) / f;
            f *= (2 * k + 2) * (2 * k + 3);
        }
        inv(0) = 1.0;
        for (int k = 1; k <= n; ++k)
            for (int j = 1; j <= k; ++j) inv(k) -= s(j) * inv(k - j);
        Vec want = Vec::Unit(n + 1, 0);
        for (int k = 0; k <= n; ++k) want = truncated_product(want, inv);
        CHECK(max_abs(truncated_product(gp, gm) - want) < 1e-12);
    }
}

TEST_CASE("integral structure") {
    const double eg = 0.57721566490153286061;
    Vec o = integral_structure_map(1, line_bundle(1, 0), 1.0);
    CHECK(std::abs(o(0) - 1.0) < 1e-15);
    CHECK(std::abs(o(1) + 2 * eg) < 1e-15);
    // n = 1 on O: psi_q = 1 - (2 gamma + log q) h and
    // a_minus = i / sqrt(2 pi) (1 + (2 gamma - 2 pi i + log q) h)
    for (cplx q : {cplx(1.0), std::exp(0.3 * I1), cplx(2.0, 0.5)}) {
        Vec p = integral_structure_map(1, line_bundle(1, 0), q, IntegralMap::psi_q);
        Vec a = integral_structure_map(1, line_bundle(1, 0), q, IntegralMap::a_minus);
        CHECK(std::abs(p(1) - (-2 * eg - std::log(q))) < 1e-14);
        CHECK(std::abs(a(0) - I1 / std::sqrt(2 * pi)) < 1e-15);
        CHECK(std::abs(a(1) - I1 / std::sqrt(2 * pi) * (2 * eg - 2 * pi * I1 + std::log(q))) < 1e-13);
    }
    CHECK_THROWS_AS(integral_structure_map(1, line_bundle(1, 0), 0.0), Error);

    std::mt19937 rng(7);
    for (int n = 1; n <= 3; ++n)
        for (cplx q : {cplx(1.0), std::exp(0.2 * I1)}) {
            FrobeniusModel model = qh_projective_space(n, q);
            for (int t = 0; t < 10; ++t) {
                KVec e = random_class(n, rng), f = random_class(n, rng);
                cplx x = euler_pairing(model, integral_structure_map(n, e, q), integral_structure_map(n, f, q));
                CHECK(std::abs(x - double(euler_chi(n, e, f))) < 1e-10 * std::max(1.0, std::abs(x)));
            }
        }
}

TEST_CASE("integer match") {
    std::mt19937 rng(11);
    const int n = 2;
    Mat images = integral_structure_matrix(n, std::exp(0.2 * I1));
    KMat f(3, 3);
    f << 1, -2, 3, 0, 1, -3, 0, 0, 1;
    Mat beta = images * f.cast<double>().cast<cplx>();
    IntegerMatch m = match_integer_classes(images, beta);
    CHECK(m.found);
    CHECK(m.coords == f);
    CHECK(m.rounding_error < 1e-10);
    CHECK(m.largest == 3);

    Mat off = beta;
    off(0, 0) += 1e-2;
    CHECK_FALSE(match_integer_classes(images, off).found);
    CHECK_FALSE(match_integer_classes(images, 60.0 * beta).found);
    CHECK(match_integer_classes(images, 60.0 * beta, 1e-4, 200).found);
}
