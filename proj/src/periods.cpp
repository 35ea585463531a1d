#include "fmon/periods.hpp"

#include "fmon/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <future>

namespace fmon {

namespace {

// continued log lambda along a polyline that avoids 0
cplx continue_log(cplx log0, const std::vector<cplx>& path) {
    cplx l = log0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) l += cplx(0.0, std::arg(path[k + 1] / path[k]));
    return {std::log(std::abs(path.back())), l.imag()};
}

OdeOptions ode_options(const PeriodContext& ctx) {
    OdeOptions o;
    o.tol = ctx.tol;
    o.singularities.assign(ctx.ss.u.data(), ctx.ss.u.data() + ctx.ss.u.size());
    o.min_clearance = 1e-3 * max_spread(ctx.ss.u);
    return o;
}

// value at 0 of the interpolating polynomial through (x_k, y_k)
Vec neville_at_zero(const std::vector<double>& x, std::vector<Vec> y) {
    const std::size_t n = x.size();
    for (std::size_t lvl = 1; lvl < n; ++lvl)
        for (std::size_t k = 0; k + lvl < n; ++k)
            y[k] = (x[k + lvl] * y[k] - x[k] * y[k + 1]) / (x[k + lvl] - x[k]);
    return y[0];
}

}  // namespace

PeriodContext make_period_context(const FrobeniusModel& model, const SemisimpleData& ss, double tol, int order) {
    PeriodContext c;
    c.model = model;
    c.ss = ss;
    c.S = calibration_series(model, order);
    c.lambda0 = 3.0 * ss.u.cwiseAbs().maxCoeff();
    c.gap = ss.u.size() > 1 ? min_gap(ss.u) : 1.0;
    c.tol = tol;
    return c;
}

Mat frame_rhs(const PeriodContext& ctx, cplx m, cplx lambda) {
    const Mat& psi = ctx.ss.psi;
    const Eigen::Index n = psi.rows();
    Mat q = psi.transpose() * ctx.model.pairing * (ctx.model.theta - (m + 0.5) * Mat::Identity(n, n));
    Vec d = (lambda - ctx.ss.u.array()).inverse().matrix();
    return psi * d.asDiagonal() * q;
}

PeriodFrame base_frame(const PeriodContext& ctx, cplx m, const LogBranchPoint& at) {
    const auto& mod = ctx.model;
    const Eigen::Index n = mod.dim;
    Mat sum = Mat::Zero(n, n);
    int small = 0;
    double last = 0.0;
    for (std::size_t k = 0; k < ctx.S.size() && small < 3; ++k) {
        Mat term = ctx.S[k] * calibrated_period(mod.theta, mod.rho, m + double(k), at);
        if (k % 2) term = -term;
        sum += term;
        last = max_abs(term) / std::max(max_abs(sum), 1e-300);
        small = last <= 1e-16 ? small + 1 : 0;
    }
    // a calibration given only as S_0 is exact
    if (ctx.S.size() > 1 && small < 3 && last > 1e-10)
        throw Error("tail", "fundamental period series did not converge at this lambda");
    return {sum, at, m, {at.lambda}};
}

double base_frame_residual(const PeriodContext& ctx, cplx m, cplx lambda) {
    Mat f = base_frame(ctx, m, lambda).value;
    Mat d = base_frame(ctx, m + 1.0, lambda).value;
    return max_abs(d - frame_rhs(ctx, m, lambda) * f) / std::max(1.0, max_abs(d));
}

PeriodFrame continue_frame(const PeriodContext& ctx, const PeriodFrame& f, const std::vector<cplx>& path) {
    if (path.empty()) return f;
    if (std::abs(path.front() - f.at.lambda) > 1e-12 * (1 + std::abs(f.at.lambda)))
        throw Error("path-start", "path does not start at the frame point");
    auto rhs = [&](cplx l) { return frame_rhs(ctx, f.m, l); };
    PeriodFrame out = f;
    out.value = continue_linear_ode(rhs, f.value, path, ode_options(ctx));
    out.at = {path.back(), continue_log(f.at.log_value, path)};
    out.provenance.insert(out.provenance.end(), path.begin() + 1, path.end());
    return out;
}

Mat loop_monodromy(const PeriodContext& ctx, const PeriodFrame& base, const std::vector<cplx>& loop) {
    if (loop.empty()) return Mat::Identity(base.value.rows(), base.value.cols());
    if (std::abs(loop.front() - loop.back()) > 1e-12 * (1 + std::abs(loop.front())))
        throw Error("open-loop", "loop is not closed");
    PeriodFrame after = continue_frame(ctx, base, loop);
    Eigen::FullPivLU<Mat> lu(base.value);
    if (inverse_condition(base.value) < 1e-13) throw Error("singular-frame", "frame is not invertible at this m");
    return lu.solve(after.value);
}

cplx regular_shift(const PeriodContext& ctx, cplx m) {
    // 1/Gamma(theta_b - m + 1/2) must not vanish
    EigenFrame th = diagonalize(ctx.model.theta);
    int k = 0;
    for (Eigen::Index b = 0; b < th.values.size(); ++b) {
        cplx s = th.values(b) - m + 0.5;
        double r = std::round(s.real());
        if (std::abs(s - r) < 1e-3 && r <= 0) k = std::max(k, int(1 - r));
    }
    return m - double(k);
}

ReflectionVector reflection_vector(const PeriodContext& ctx, cplx m, const PathPlan& path, int spiral_exponent) {
    cplx half = m + 0.5;
    if (std::abs(half - std::round(half.real())) < 1e-9) throw Error("logarithmic", "m is in 1/2 + Z");
    const int i = path.target;
    const cplx ui = ctx.ss.u(i);
    const cplx ms = regular_shift(ctx, m);
    const cplx twist = std::exp(pi * I1 * m);
    const cplx eig = -1.0 / (twist * twist);

    PeriodFrame end = continue_frame(ctx, base_frame(ctx, ms), path.waypoints);
    Mat mono = loop_monodromy(ctx, end, end_circle(path, ctx.ss.u));

    Eigen::ComplexEigenSolver<Mat> es(mono);
    Eigen::Index best = 0;
    (es.eigenvalues().array() - eig).abs().minCoeff(&best);
    if (std::abs(es.eigenvalues()(best) - eig) > 1e-4)
        throw Error("eigenvalue", "local monodromy has no eigenvalue -q^-2");
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
        if (k != best && std::abs(es.eigenvalues()(k) - eig) < 1e-4)
            throw Error("eigenvalue-cluster", "eigenvalue -q^-2 is not separated");
    Vec v = es.eigenvectors().col(best);

    // the eigenvector is read off at m_s, the singular part is fitted at m itself: at m_s < m the
    // eigen-period vanishes at u_i and the fit would amplify integration noise
    const PeriodFrame fit = ms == m ? end : continue_frame(ctx, base_frame(ctx, m), path.waypoints);

    // leading coefficient of (lambda - u_i)^{m+1/2} I_v along the end ray
    cplx dir = (path.waypoints.back() - ui) / std::abs(path.waypoints.back() - ui);
    double theta_end = path.end_log.log_value.imag() + 2 * pi * spiral_exponent;
    std::vector<double> radii;
    std::vector<Vec> vals;
    std::vector<cplx> seg{path.waypoints.back()};
    Mat y = fit.value * v;
    OdeOptions o = ode_options(ctx);
    o.min_clearance = std::min(o.min_clearance, 0.02 * ctx.gap);
    auto rhs = [&](cplx l) { return frame_rhs(ctx, m, l); };
    for (int k = 0; k < 6; ++k) {
        double r = 0.05 * ctx.gap / double(1 << k);
        cplx p = ui + r * dir;
        y = continue_linear_ode(rhs, y, {seg.back(), p}, o);
        seg.push_back(p);
        radii.push_back(r);
        vals.push_back(std::exp((m + 0.5) * cplx(std::log(r), theta_end)) * y.col(0));
    }
    Vec w0 = neville_at_zero(radii, vals);
    Vec target = std::sqrt(2 * pi) * rgamma(-m + 0.5) * ctx.ss.psi.col(i);
    cplx c = w0.dot(target) / w0.dot(w0);
    double misfit = (c * w0 - target).norm() / target.norm();
    if (misfit > 1e-5) throw Error("misfit", "leading coefficient is not proportional to Psi e_i");

    ReflectionVector out;
    out.beta = c * v;
    out.path = path;
    out.m = m;
    out.spiral_exponent = spiral_exponent;
    out.monodromy = mono;
    out.misfit = misfit;
    return out;
}

Mat reflection_basis(const PeriodContext& ctx, cplx m, const DistinguishedSystem& sys,
                     std::vector<ReflectionVector>* detail) {
    const std::size_t n = sys.paths.size();
    std::vector<std::future<ReflectionVector>> jobs;
    for (std::size_t k = 0; k < n; ++k)
        jobs.push_back(std::async(std::launch::async, [&, k] { return reflection_vector(ctx, m, sys.paths[k]); }));
    Mat b(ctx.model.dim, Eigen::Index(n));
    std::vector<ReflectionVector> all;
    for (std::size_t k = 0; k < n; ++k) {
        all.push_back(jobs[k].get());
        b.col(Eigen::Index(k)) = all.back().beta;
    }
    if (detail) *detail = std::move(all);
    return b;
}

Mat hm_matrix(const PeriodContext& ctx, cplx m) {
    const auto& mod = ctx.model;
    const Eigen::Index n = mod.dim;
    auto pair = [&](const PeriodFrame& a, const PeriodFrame& b) {
        cplx l = a.at.lambda;
        return Mat(a.value.transpose() * mod.pairing * (l * Mat::Identity(n, n) - mod.euler_mult) * b.value);
    };
    PeriodFrame p = base_frame(ctx, m), q = base_frame(ctx, -m);
    Mat h = pair(p, q);
    auto arc = arc_points(0.0, ctx.lambda0, 0.0, 0.3);
    Mat h2 = pair(continue_frame(ctx, p, arc), continue_frame(ctx, q, arc));
    if (max_abs(h - h2) > 1e-8 * (1 + max_abs(h)))
        throw Error("hm-independence", "h_m differs between two values of lambda");
    return h;
}

cplx hm_pairing(const PeriodContext& ctx, cplx m, const Vec& a, const Vec& b) {
    return (a.transpose() * hm_matrix(ctx, m) * b)(0, 0);
}

Mat euler_matrix(const FrobeniusModel& model) {
    Mat e = operator_power(LogBranchPoint{-1.0, pi * I1}, model.theta, Mat(-model.rho));
    return model.pairing * e / (2 * pi);
}

cplx euler_pairing(const FrobeniusModel& model, const Vec& a, const Vec& b) {
    return (a.transpose() * euler_matrix(model) * b)(0, 0);
}

Mat hm_closed_form(const FrobeniusModel& model, cplx m) {
    cplx q = std::exp(pi * I1 * m);
    Mat g = euler_matrix(model);
    return q * g + g.transpose() / q;
}

Mat dual_reflection_basis(const Mat& h, const Mat& beta_minus) {
    Mat a = h * beta_minus;
    Eigen::FullPivLU<Mat> lu(a);
    if (inverse_condition(a) < 1e-12) throw Error("singular-gram", "h_m is degenerate on the reflection vectors");
    Mat x = lu.inverse().transpose();
    if (max_abs(x.transpose() * a - Mat::Identity(a.rows(), a.cols())) > 1e-8)
        throw Error("singular-gram", "dual basis residual too large");
    return x;
}

Vec LaurentSeries::operator()(cplx log_offset, int terms) const {
    std::size_t n = terms < 0 ? coeff.size() : std::min(coeff.size(), std::size_t(terms));
    Vec s = Vec::Zero(coeff.front().size());
    for (std::size_t k = 0; k < n; ++k) s += std::exp((double(k) - m - 0.5) * log_offset) * coeff[k];
    return s;
}

LaurentSeries local_laurent_frame(const PeriodContext& ctx, int i, cplx m, int order) {
    auto R = rmatrix_series(ctx.model, ctx.ss, order);
    LaurentSeries s;
    s.centre = ctx.ss.u(i);
    s.m = m;
    for (int k = 0; k <= order; ++k) {
        Vec c = std::sqrt(2 * pi) * rgamma(double(k) - m + 0.5) * (ctx.ss.psi * R[k].col(i));
        s.coeff.push_back(k % 2 ? Vec(-c) : c);
    }
    return s;
}

}  // namespace fmon
