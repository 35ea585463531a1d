#include "fmon/ktheory.hpp"

#include <boost/rational.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace fmon {

namespace {

using Rational = boost::rational<std::int64_t>;
using RSeries = std::vector<Rational>;

RSeries rmul(const RSeries& a, const RSeries& b) {
    RSeries c(a.size(), Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; i + j < a.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

Rational rfactorial(int k) {
    std::int64_t f = 1;
    for (int j = 2; j <= k; ++j) f *= j;
    return Rational(f);
}

// ch(E) with the classical normalisation
RSeries rchern(int n, const KVec& e) {
    RSeries c(n + 1, Rational(0));
    for (int a = 0; a <= n; ++a) {
        if (e(a) == 0) continue;
        std::int64_t pw = 1;
        for (int k = 0; k <= n; ++k) {
            c[k] += Rational(e(a) * pw) / rfactorial(k);
            pw *= a;
        }
    }
    return c;
}

RSeries rtodd(int n) {
    // x / (1 - e^-x) is the inverse of sum (-1)^k x^k / (k+1)!
    RSeries f(n + 1), g(n + 1, Rational(0));
    for (int k = 0; k <= n; ++k) f[k] = Rational(k % 2 ? -1 : 1) / rfactorial(k + 1);
    g[0] = 1;
    for (int k = 1; k <= n; ++k)
        for (int j = 1; j <= k; ++j) g[k] -= f[j] * g[k - j];
    RSeries td(n + 1, Rational(0));
    td[0] = 1;
    for (int k = 0; k <= n; ++k) td = rmul(td, g);
    return td;
}

void check_class(int n, const KVec& e) {
    if (n < 0 || e.size() != n + 1) throw Error("dimension", "class has the wrong number of coordinates");
}

}  // namespace

std::int64_t binom_poly(std::int64_t x, int k) {
    std::int64_t r = 1;
    for (int j = 1; j <= k; ++j) r = r * (x - j + 1) / j;
    return r;
}

KVec line_bundle(int n, std::int64_t a) {
    const int N = n + 1;
    std::vector<KVec> win(N);
    for (int k = 0; k < N; ++k) win[k] = KVec::Unit(N, k);
    // Koszul: sum_k (-1)^k binom(n+1, k) O(a - k) = 0
    std::int64_t lo = 0;
    while (a > lo + n) {
        KVec next = KVec::Zero(N);
        for (int k = 1; k <= N; ++k) next -= (k % 2 ? -1 : 1) * binom_poly(N, k) * win[N - k];
        win.erase(win.begin());
        win.push_back(next);
        ++lo;
    }
    while (a < lo) {
        KVec next = KVec::Zero(N);
        for (int k = 0; k < N; ++k) next -= (k % 2 ? -1 : 1) * binom_poly(N, k) * win[N - 1 - k];
        if (N % 2) next = -next;
        win.pop_back();
        win.insert(win.begin(), next);
        --lo;
    }
    return win[a - lo];
}

KMat chi_matrix(int n) {
    KMat c(n + 1, n + 1);
    for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b) c(a, b) = binom_poly(n + b - a, n);
    return c;
}

std::int64_t euler_chi(int n, const KVec& e, const KVec& f) {
    check_class(n, e);
    check_class(n, f);
    return e.dot(chi_matrix(n) * f);
}

KVec twist(int n, const KVec& e, std::int64_t k) {
    check_class(n, e);
    KVec out = KVec::Zero(n + 1);
    for (int a = 0; a <= n; ++a)
        if (e(a)) out += e(a) * line_bundle(n, a + k);
    return out;
}

KVec dual_class(int n, const KVec& e) {
    check_class(n, e);
    KVec out = KVec::Zero(n + 1);
    for (int a = 0; a <= n; ++a)
        if (e(a)) out += e(a) * line_bundle(n, -a);
    return out;
}

std::int64_t hrr_chi(int n, const KVec& e, const KVec& f) {
    RSeries s = rmul(rmul(rchern(n, dual_class(n, e)), rchern(n, f)), rtodd(n));
    const Rational& top = s[n];
    if (top.denominator() != 1) throw Error("hrr", "Riemann-Roch integral is not an integer");
    return top.numerator();
}

KMat ExceptionalCollection::gram() const {
    const Eigen::Index N = Eigen::Index(size());
    KMat c = chi_matrix(n), g(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) g(i, j) = classes[i].dot(c * classes[j]);
    return g;
}

bool ExceptionalCollection::exceptional() const {
    KMat g = gram();
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        if (g(i, i) != 1) return false;
        for (Eigen::Index j = 0; j < i; ++j)
            if (g(i, j) != 0) return false;
    }
    return true;
}

KMat ExceptionalCollection::columns() const {
    KMat m(n + 1, Eigen::Index(size()));
    for (std::size_t i = 0; i < size(); ++i) m.col(Eigen::Index(i)) = classes[i];
    return m;
}

bool ExceptionalCollection::operator==(const ExceptionalCollection& o) const {
    if (n != o.n || size() != o.size()) return false;
    for (std::size_t i = 0; i < size(); ++i)
        if (classes[i] != o.classes[i]) return false;
    return true;
}

ExceptionalCollection beilinson(int n, std::int64_t first) {
    ExceptionalCollection c{n, {}};
    for (int k = 0; k <= n; ++k) c.classes.push_back(line_bundle(n, first + k));
    return c;
}

ExceptionalCollection from_columns(int n, const KMat& cols) {
    if (cols.rows() != n + 1) throw Error("dimension", "class has the wrong number of coordinates");
    ExceptionalCollection c{n, {}};
    for (Eigen::Index j = 0; j < cols.cols(); ++j) c.classes.push_back(cols.col(j));
    return c;
}

ExceptionalCollection mutate(const ExceptionalCollection& c, int i, Side side) {
    if (i < 0 || i + 1 >= int(c.size())) throw Error("index", "mutation index out of range");
    ExceptionalCollection out = c;
    const KVec& e = c.classes[i];
    const KVec& f = c.classes[i + 1];
    const std::int64_t x = euler_chi(c.n, e, f);
    if (side == Side::L) {
        out.classes[i] = f - x * e;
        out.classes[i + 1] = e;
    } else {
        out.classes[i] = f;
        out.classes[i + 1] = e - x * f;
    }
    if (c.exceptional() && !out.exceptional()) throw Error("internal", "mutation broke exceptionality");
    return out;
}

ExceptionalCollection apply_word(const ExceptionalCollection& c, const MutationWord& w) {
    ExceptionalCollection out = c;
    for (auto [i, s] : w) out = mutate(out, i, s);
    return out;
}

MutationWord inverse_word(const MutationWord& w) {
    MutationWord r(w.rbegin(), w.rend());
    for (auto& [i, s] : r) s = s == Side::L ? Side::R : Side::L;
    return r;
}

MutationWord parse_word(const std::string& text) {
    std::string t = text;
    for (char& ch : t)
        if (ch == ',') ch = ' ';
    std::istringstream in(t);
    MutationWord w;
    std::string tok;
    while (in >> tok) {
        if (tok.size() < 2 || (tok[0] != 'L' && tok[0] != 'R' && tok[0] != 'l' && tok[0] != 'r'))
            throw Error("word", "bad generator '" + tok + "'");
        int k = 0;
        try {
            std::size_t used = 0;
            k = std::stoi(tok.substr(1), &used);
            if (used != tok.size() - 1) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw Error("word", "bad generator '" + tok + "'");
        }
        if (k < 1) throw Error("word", "generators start at 1");
        w.emplace_back(k - 1, tok[0] == 'L' || tok[0] == 'l' ? Side::L : Side::R);
    }
    return w;
}

std::string word_text(const MutationWord& w) {
    std::string s;
    for (auto [i, side] : w) {
        if (!s.empty()) s += ' ';
        s += (side == Side::L ? "L" : "R") + std::to_string(i + 1);
    }
    return s;
}

MutationWord koszul_word(int size) {
    MutationWord w;
    for (int s = 0; s + 1 < size; ++s)
        for (int t = size - 2; t >= s; --t) w.emplace_back(t, Side::L);
    return w;
}

ExceptionalCollection left_koszul_dual(const ExceptionalCollection& c) {
    return apply_word(c, koszul_word(int(c.size())));
}

ExceptionalCollection helix_shift(const ExceptionalCollection& c, int k) {
    const int N = int(c.size());
    const std::int64_t sign = N % 2 ? 1 : -1;
    ExceptionalCollection out = c;
    for (; k > 0; --k) {
        for (int i = 0; i + 1 < N; ++i) out = mutate(out, i, Side::R);
        out.classes.back() *= sign;
    }
    for (; k < 0; ++k) {
        for (int i = N - 2; i >= 0; --i) out = mutate(out, i, Side::L);
        out.classes.front() *= sign;
    }
    return out;
}

ExceptionalCollection shifted(const ExceptionalCollection& c, int k) {
    ExceptionalCollection out = c;
    if (k % 2)
        for (auto& e : out.classes) e = -e;
    return out;
}

Vec truncated_product(const Vec& a, const Vec& b) {
    const Eigen::Index N = a.size();
    Vec c = Vec::Zero(N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; i + j < N; ++j) c(i + j) += a(i) * b(j);
    return c;
}

Vec truncated_exp(const Vec& a) {
    const Eigen::Index N = a.size();
    Vec nil = a;
    nil(0) = 0.0;
    Vec term = Vec::Unit(N, 0), sum = term;
    for (Eigen::Index k = 1; k < N; ++k) {
        term = truncated_product(term, nil) / double(k);
        sum += term;
    }
    return std::exp(a(0)) * sum;
}

Vec chern_character(int n, const KVec& e, bool rescaled) {
    check_class(n, e);
    const cplx c = rescaled ? 2 * pi * I1 : cplx(1.0);
    Vec out = Vec::Zero(n + 1);
    for (int a = 0; a <= n; ++a) {
        if (!e(a)) continue;
        Vec x = Vec::Zero(n + 1);
        if (n > 0) x(1) = c * double(a);
        out += double(e(a)) * truncated_exp(x);
    }
    return out;
}

Vec gamma_class(int n, int sign) {
    // log Gamma(1 + x) = -gamma x + sum_k zeta(k) (-x)^k / k
    Vec l = Vec::Zero(n + 1);
    if (n >= 1) l(1) = -std::numbers::egamma * sign;
    for (int k = 2; k <= n; ++k) l(k) = std::riemann_zeta(double(k)) * std::pow(-double(sign), k) / k;
    return truncated_exp(double(n + 1) * l);
}

Vec integral_structure_map(int n, const KVec& e, cplx q, IntegralMap variant) {
    if (q == 0.0) throw Error("novikov", "q must be non-zero");
    Vec ch = chern_character(n, e, true);
    Vec logq = Vec::Zero(n + 1);
    if (n > 0) logq(1) = std::log(q);
    if (variant == IntegralMap::psi_q)
        return std::pow(2 * pi, (1.0 - n) / 2) *
               truncated_product(truncated_product(gamma_class(n, 1), truncated_exp(-logq)), ch);
    Vec c1 = Vec::Zero(n + 1);
    if (n > 0) c1(1) = -pi * I1 * double(n + 1);
    Vec v = truncated_product(gamma_class(n, -1), truncated_exp(c1));
    v = truncated_product(truncated_product(v, truncated_exp(logq)), ch);
    return std::pow(I1, n % 2) / std::pow(2 * pi, n / 2.0) * v;
}

Mat integral_structure_matrix(int n, cplx q, IntegralMap variant) {
    Mat m(n + 1, n + 1);
    for (int a = 0; a <= n; ++a) m.col(a) = integral_structure_map(n, KVec::Unit(n + 1, a), q, variant);
    return m;
}

IntegerMatch match_integer_classes(const Mat& images, const Mat& beta, double tol, std::int64_t bound) {
    if (images.rows() != beta.rows()) throw Error("dimension", "lattice images and vectors differ in size");
    Mat x = images.colPivHouseholderQr().solve(beta);
    IntegerMatch r;
    r.coords.resize(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            double v = std::round(x(i, j).real());
            r.rounding_error = std::max(r.rounding_error, std::abs(x(i, j) - v));
            if (std::abs(v) > 1e15) {
                r.largest = std::numeric_limits<std::int64_t>::max();
                continue;
            }
            r.coords(i, j) = std::int64_t(v);
            r.largest = std::max<std::int64_t>(r.largest, std::abs(r.coords(i, j)));
        }
    r.found = r.rounding_error < tol && r.largest <= bound;
    return r;
}

}  // namespace fmon
