#pragma once

#include "fmon/frobenius.hpp"
#include "fmon/paths.hpp"

namespace fmon {

// everything the lambda-plane engine needs at one semisimple point
struct PeriodContext {
    FrobeniusModel model;
    SemisimpleData ss;  // u order referred to by PathPlan::target
    std::vector<Mat> S;
    double lambda0 = 0.0;
    double gap = 0.0;
    double tol = 1e-10;
};

PeriodContext make_period_context(const FrobeniusModel& model, const SemisimpleData& ss, double tol = 1e-10,
                                  int order = 60);

struct PeriodFrame {
    Mat value;
    LogBranchPoint at;  // lambda and the continued value of log lambda
    cplx m = 0.0;
    std::vector<cplx> provenance;
};

// (lambda - E)^-1 (theta - m - 1/2)
Mat frame_rhs(const PeriodContext& ctx, cplx m, cplx lambda);

PeriodFrame base_frame(const PeriodContext& ctx, cplx m, const LogBranchPoint& lambda);
inline PeriodFrame base_frame(const PeriodContext& ctx, cplx m, cplx lambda) {
    return base_frame(ctx, m, principal(lambda));
}
inline PeriodFrame base_frame(const PeriodContext& ctx, cplx m) { return base_frame(ctx, m, ctx.lambda0); }
// d/dlambda I^(m) - rhs I^(m), using d/dlambda I^(m) = I^(m+1)
double base_frame_residual(const PeriodContext& ctx, cplx m, cplx lambda);

PeriodFrame continue_frame(const PeriodContext& ctx, const PeriodFrame& f, const std::vector<cplx>& path);
// continued = base * M
Mat loop_monodromy(const PeriodContext& ctx, const PeriodFrame& base, const std::vector<cplx>& loop);

// the member m - k of the twisted sequence whose frame is invertible
cplx regular_shift(const PeriodContext& ctx, cplx m);

struct ReflectionVector {
    Vec beta;
    PathPlan path;
    cplx m = 0.0;
    int spiral_exponent = 0;
    Mat monodromy;  // simple loop at the end of the path, in frame coordinates
    double misfit = 0.0;
};

ReflectionVector reflection_vector(const PeriodContext& ctx, cplx m, const PathPlan& path, int spiral_exponent = 0);
// columns beta_1..beta_N of a whole system, slot order
Mat reflection_basis(const PeriodContext& ctx, cplx m, const DistinguishedSystem& sys,
                     std::vector<ReflectionVector>* detail = nullptr);

// h_m(a, b) = a^t H b, from frames at m and -m; checked at a second lambda
Mat hm_matrix(const PeriodContext& ctx, cplx m);
cplx hm_pairing(const PeriodContext& ctx, cplx m, const Vec& a, const Vec& b);

// <a, b> = a^t G b with G = g e^{pi i theta} e^{pi i rho} / 2pi
Mat euler_matrix(const FrobeniusModel& model);
cplx euler_pairing(const FrobeniusModel& model, const Vec& a, const Vec& b);
// q <a,b> + q^-1 <b,a>, q = e^{pi i m}
Mat hm_closed_form(const FrobeniusModel& model, cplx m);

// columns beta_i^* with h(beta_i^*, beta_j(-m)) = delta_ij
Mat dual_reflection_basis(const Mat& h, const Mat& beta_minus);

// sqrt(2pi) sum_k (-1)^k Psi R_k e_i (lambda - u_i)^{k-m-1/2} / Gamma(k-m+1/2)
struct LaurentSeries {
    cplx centre = 0.0;
    cplx m = 0.0;
    std::vector<Vec> coeff;
    // log_offset = a value of log(lambda - centre)
    Vec operator()(cplx log_offset, int terms = -1) const;
};
LaurentSeries local_laurent_frame(const PeriodContext& ctx, int i, cplx m, int order);

}  // namespace fmon
