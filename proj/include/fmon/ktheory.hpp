#pragma once

#include "fmon/paths.hpp"

#include <cstdint>
#include <utility>

namespace fmon {

using KVec = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using KMat = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// x (x-1) ... (x-k+1) / k!, exact for every integer x
std::int64_t binom_poly(std::int64_t x, int k);

// [O(a)] in the basis [O], [O(1)], ..., [O(n)] of K_0(P^n)
KVec line_bundle(int n, std::int64_t a);
// chi(O(a), O(b)) for 0 <= a, b <= n
KMat chi_matrix(int n);
std::int64_t euler_chi(int n, const KVec& e, const KVec& f);
// E (x) O(k)
KVec twist(int n, const KVec& e, std::int64_t k);
KVec dual_class(int n, const KVec& e);
// int ch(E^vee) ch(F) td over P^n in rationals; throws unless the result is an integer
std::int64_t hrr_chi(int n, const KVec& e, const KVec& f);

struct ExceptionalCollection {
    int n = 0;
    std::vector<KVec> classes;

    std::size_t size() const { return classes.size(); }
    KMat gram() const;
    bool exceptional() const;
    KMat columns() const;
    bool operator==(const ExceptionalCollection& o) const;
};

ExceptionalCollection beilinson(int n, std::int64_t first = 0);
ExceptionalCollection from_columns(int n, const KMat& cols);

// slots i and i+1, 0-based; L: (E, F) -> (F - chi(E,F) E, E), R: (E, F) -> (F, E - chi(E,F) F)
ExceptionalCollection mutate(const ExceptionalCollection& c, int i, Side side);
using MutationWord = std::vector<std::pair<int, Side>>;
// applied left to right
ExceptionalCollection apply_word(const ExceptionalCollection& c, const MutationWord& w);
MutationWord inverse_word(const MutationWord& w);
// "L1 R2" with 1-based generators
MutationWord parse_word(const std::string& text);
std::string word_text(const MutationWord& w);

ExceptionalCollection left_koszul_dual(const ExceptionalCollection& c);
// the word of left_koszul_dual, left to right
MutationWord koszul_word(int size);
// k steps along the helix; new members carry the sign (-1)^(N-1) so that O(a) continues as O(a+n+1)
ExceptionalCollection helix_shift(const ExceptionalCollection& c, int k);
// E[k] on every member
ExceptionalCollection shifted(const ExceptionalCollection& c, int k);

// coefficients of 1, h, ..., h^n
Vec truncated_product(const Vec& a, const Vec& b);
Vec truncated_exp(const Vec& a);
Vec chern_character(int n, const KVec& e, bool rescaled = true);
// Gamma(1 + sign h)^(n+1)
Vec gamma_class(int n, int sign);

enum class IntegralMap { psi_q, a_minus };
Vec integral_structure_map(int n, const KVec& e, cplx q, IntegralMap variant = IntegralMap::psi_q);
// images of O, O(1), ..., O(n) as columns
Mat integral_structure_matrix(int n, cplx q, IntegralMap variant = IntegralMap::psi_q);

struct IntegerMatch {
    KMat coords;  // column i = F_i in the basis O(0..n)
    double rounding_error = 0.0;
    std::int64_t largest = 0;
    bool found = false;
};
// beta_i = images * F_i, least squares then rounding
IntegerMatch match_integer_classes(const Mat& images, const Mat& beta, double tol = 1e-4, std::int64_t bound = 50);

}  // namespace fmon
