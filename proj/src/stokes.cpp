#include "fmon/stokes.hpp"

#include "fmon/numerics.hpp"

#include <future>

namespace fmon {

namespace {

std::vector<double> critical_angles_mod(const Vec& u) {
    std::vector<double> out;
    for (auto& d : critical_directions(u)) out.push_back(std::fmod(d.angle() + 2 * pi, 2 * pi));
    return out;
}

// smallest c + 2 pi k strictly above a
double next_above(const std::vector<double>& crit, double a) {
    double best = std::numeric_limits<double>::infinity();
    for (double c : crit) {
        double k = std::floor((a - c) / (2 * pi)) + 1;
        double x = c + 2 * pi * k;
        if (x - a < 1e-12) x += 2 * pi;
        best = std::min(best, x);
    }
    return best;
}

double reduce_into(double a, double lo, double hi) {
    double k = std::ceil((lo - a) / (2 * pi));
    a += 2 * pi * k;
    if (!(a > lo && a < hi)) throw Error("sector", "sample point is outside the sector of the oscillatory frame");
    return a;
}

// Psi R(z0) e_i, summed until the terms stop decreasing
Vec seed_column(const StokesContext& ctx, int i, cplx z0) {
    const Mat& psi = ctx.periods.ss.psi;
    Vec s = Vec::Zero(psi.rows());
    double prev = std::numeric_limits<double>::infinity();
    cplx p = 1.0;
    for (std::size_t k = 0; k < ctx.R.size(); ++k, p *= z0) {
        Vec t = p * (psi * ctx.R[k].col(i));
        double n = t.norm();
        if (n > prev) break;
        s += t;
        prev = n;
        if (n < 1e-17 * s.norm()) break;
    }
    if (prev > 1e-9 * s.norm()) throw Error("seed", "asymptotic series too coarse at the seed point");
    return s;
}

std::vector<Vec> ode_column(const StokesContext& ctx, int i, double phi, double r0, const std::vector<double>& r,
                            const std::vector<double>& ang) {
    const auto& mod = ctx.periods.model;
    const cplx ui = ctx.periods.ss.u(i);
    const Eigen::Index n = mod.dim;
    auto rhs = [&](cplx w) { return Mat(mod.euler_mult - ui * Mat::Identity(n, n) - mod.theta / w); };
    OdeOptions o;
    o.tol = ctx.ode_tol;
    o.singularities = {0.0};
    const cplx z0 = r0 * std::exp(I1 * phi);
    const double rmax = *std::max_element(r.begin(), r.end());
    Mat y = seed_column(ctx, i, z0);
    y = continue_linear_ode(rhs, y, {1.0 / z0, std::exp(-I1 * phi) / rmax}, o);
    std::vector<Vec> out;
    for (std::size_t s = 0; s < r.size(); ++s) {
        std::vector<cplx> pts = arc_points(0.0, 1.0 / rmax, -phi, -ang[s], pi / 72);
        pts.push_back(std::exp(-I1 * ang[s]) / r[s]);
        Mat v = continue_linear_ode(rhs, y, pts, o);
        out.push_back(std::exp(ui * std::exp(-I1 * ang[s]) / r[s]) * v.col(0));
    }
    return out;
}

// (-z)^{-1/2} / sqrt(2 pi) times the Laplace integral of the m = 0 period along u_i + dir R_+
Vec laplace_column(const StokesContext& ctx, const Direction& eta, int i, cplx z) {
    const auto& pc = ctx.periods;
    const auto& mod = pc.model;
    const Eigen::Index n = mod.dim;
    const cplx ui = pc.ss.u(i);
    Chamber ch = chamber_of(pc.ss.u, eta);
    double target = std::arg(z) + pi;
    target += 2 * pi * std::round((eta.angle() - target) / (2 * pi));
    const double margin = 0.1 * (ch.ccw - ch.cw);
    const double psi = std::clamp(target, ch.cw + margin, ch.ccw - margin);
    const cplx dir = std::exp(I1 * psi);
    const cplx logdir = cplx(eta.log_eta.real(), psi);
    const double decay = -(dir / z).real();
    if (decay < 0.05 / std::abs(z)) throw Error("sector", "no admissible ray makes the Laplace integral converge");

    std::vector<Vec> c;
    const std::size_t K = std::min<std::size_t>(ctx.R.size(), 31);
    for (std::size_t k = 0; k < K; ++k) {
        Vec v = std::sqrt(2 * pi) * rgamma(cplx(double(k) + 0.5)) * (pc.ss.psi * ctx.R[k].col(i));
        c.push_back(k % 2 ? Vec(-v) : v);
    }
    const double s1 = std::min(0.05 * pc.gap, 0.5 * std::abs(z));
    const cplx ratio = dir / z;
    Vec near = Vec::Zero(n), start = Vec::Zero(n);
    for (std::size_t k = 0; k < K; ++k) {
        const double a = double(k) + 0.5;
        cplx ser = 0.0, t = 1.0;
        for (int j = 0; j < 200; ++j) {
            cplx term = t * std::pow(s1, double(j) + a) / (double(j) + a);
            ser += term;
            if (j > 4 && std::abs(term) < 1e-18 * std::abs(ser)) break;
            t *= ratio / double(j + 1);
        }
        near += std::exp(a * logdir) * ser * c[k];
        start += std::exp((a - 1.0) * (std::log(s1) + logdir)) * c[k];
    }

    auto rhs = [&](cplx l) {
        Mat a = Mat::Zero(2 * n, 2 * n);
        a.topLeftCorner(n, n) = frame_rhs(pc, 0.0, l);
        a.bottomLeftCorner(n, n) = std::exp((l - ui) / z) * Mat::Identity(n, n);
        return a;
    };
    Mat y = Mat::Zero(2 * n, 1);
    y.topRows(n) = start;
    OdeOptions o;
    o.tol = ctx.ode_tol;
    o.singularities.assign(pc.ss.u.data(), pc.ss.u.data() + pc.ss.u.size());
    const double smax = s1 + 40.0 / decay;
    y = continue_linear_ode(rhs, y, {ui + s1 * dir, ui + smax * dir}, o);
    Vec total = near + y.bottomRows(n).col(0);
    const cplx logmz = logdir + std::log(-z / dir);
    return std::exp(ui / z - 0.5 * logmz) * total / std::sqrt(2 * pi);
}

struct Fit {
    Mat x;
    double residual = 0.0;
};

// a_k x = b_k for all k, rows of each sample scaled by |b_k|
Fit stacked_solve(const std::vector<Mat>& a, const std::vector<Mat>& b) {
    const Eigen::Index n = a[0].rows(), k = Eigen::Index(a.size());
    Mat A(n * k, a[0].cols()), B(n * k, b[0].cols());
    for (Eigen::Index s = 0; s < k; ++s) {
        double sc = 1.0 / max_abs(b[s]);
        A.middleRows(s * n, n) = a[s] * sc;
        B.middleRows(s * n, n) = b[s] * sc;
    }
    Fit f;
    f.x = A.colPivHouseholderQr().solve(B);
    for (Eigen::Index s = 0; s < k; ++s)
        f.residual = std::max(f.residual, max_abs(a[s] * f.x - b[s]) / max_abs(b[s]));
    return f;
}

Mat by_slots(const Mat& a, const std::vector<int>& order) {
    Mat r(a.rows(), a.cols());
    for (std::size_t x = 0; x < order.size(); ++x)
        for (std::size_t y = 0; y < order.size(); ++y) r(Eigen::Index(x), Eigen::Index(y)) = a(order[x], order[y]);
    return r;
}

Mat columns_by_u(const Mat& slots, const std::vector<int>& targets) {
    Mat r(slots.rows(), slots.cols());
    for (std::size_t s = 0; s < targets.size(); ++s) r.col(targets[s]) = slots.col(Eigen::Index(s));
    return r;
}

}  // namespace

StokesContext make_stokes_context(const PeriodContext& periods, int r_order) {
    StokesContext c;
    c.periods = periods;
    c.R = rmatrix_series(periods.model, periods.ss, r_order);
    c.spread = periods.ss.u.size() > 1 ? max_spread(periods.ss.u) : 1.0;
    return c;
}

Chamber chamber_of(const Vec& u, const Direction& eta) {
    auto crit = critical_angles_mod(u);
    const double a = eta.angle();
    for (double c : crit) {
        double d = std::remainder(a - c, pi);
        if (std::abs(d) < 1e-10) throw Error("critical-direction", "eta is a critical direction");
    }
    Chamber ch;
    ch.ccw = next_above(crit, a);
    ch.cw = -std::numeric_limits<double>::infinity();
    for (double c : crit) {
        double x = c + 2 * pi * std::floor((a - c) / (2 * pi));
        ch.cw = std::max(ch.cw, x);
    }
    return ch;
}

Direction opposite(const Direction& eta) { return {-eta.eta, eta.log_eta - cplx(0.0, pi)}; }
Direction opposite_ccw(const Direction& eta) { return {-eta.eta, eta.log_eta + cplx(0.0, pi)}; }

Sector sector_of(const Vec& u, const Direction& eta) {
    Chamber ch = chamber_of(u, eta);
    return {ch.cw + pi / 2, ch.ccw + 3 * pi / 2};
}

Pinning pin_column(const StokesContext& ctx, const Direction& eta, int i) {
    const Vec& u = ctx.periods.ss.u;
    Sector sec = sector_of(u, eta);
    Pinning best;
    const int grid = 720;
    for (int k = 1; k < grid; ++k) {
        double phi = sec.lo + (sec.hi - sec.lo) * k / grid;
        double marg = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < u.size(); ++j)
            if (j != i) marg = std::min(marg, ((u(j) - u(i)) * std::exp(-I1 * phi)).real() / std::abs(u(j) - u(i)));
        if (marg > best.margin) best = {phi, marg};
    }
    return best;
}

std::vector<Mat> oscillatory_frames(const StokesContext& ctx, const Direction& eta, const std::vector<cplx>& z,
                                    FrameMethod method, double seed_scale) {
    const auto& pc = ctx.periods;
    const int n = pc.model.dim;
    Sector sec = sector_of(pc.ss.u, eta);
    std::vector<double> r, ang;
    for (cplx x : z) {
        r.push_back(std::abs(x));
        ang.push_back(reduce_into(std::arg(x), sec.lo, sec.hi));
    }
    const double rmin = *std::min_element(r.begin(), r.end());
    const double r0 = seed_scale * std::min(pc.gap / 30.0, 0.5 * rmin);

    std::vector<std::future<std::vector<Vec>>> jobs;
    for (int i = 0; i < n; ++i)
        jobs.push_back(std::async(std::launch::async, [&, i] {
            Pinning p = pin_column(ctx, eta, i);
            bool ode = method == FrameMethod::ode || (method == FrameMethod::automatic && p.pinnable());
            if (ode) {
                if (!p.pinnable()) throw Error("unpinnable", "column has no recessive direction in the sector");
                return ode_column(ctx, i, p.angle, r0, r, ang);
            }
            std::vector<Vec> cols;
            for (cplx x : z) cols.push_back(laplace_column(ctx, eta, i, x));
            return cols;
        }));
    std::vector<Mat> out(z.size(), Mat(n, n));
    for (int i = 0; i < n; ++i) {
        auto cols = jobs[i].get();
        for (std::size_t s = 0; s < z.size(); ++s) out[s].col(i) = cols[s];
    }
    return out;
}

Mat oscillatory_frame(const StokesContext& ctx, const Direction& eta, cplx z, FrameMethod method) {
    return oscillatory_frames(ctx, eta, {z}, method)[0];
}

double frame_equation_residual(const StokesContext& ctx, const Direction& eta, cplx z, FrameMethod method) {
    const auto& mod = ctx.periods.model;
    const cplx h = 1e-3 * z;
    std::vector<cplx> pts{z - 2.0 * h, z - h, z, z + h, z + 2.0 * h};
    auto x = oscillatory_frames(ctx, eta, pts, method);
    Mat d = (x[0] - 8.0 * x[1] + 8.0 * x[3] - x[4]) / (12.0 * h);
    Mat res = z * d - (mod.theta - mod.euler_mult / z) * x[2];
    return max_abs(res) / max_abs(z * d);
}

MonodromyData monodromy_data_analytic(const StokesContext& ctx, const Direction& eta) {
    const auto& pc = ctx.periods;
    const Vec& u = pc.ss.u;
    const auto& mod = pc.model;
    Chamber ch = chamber_of(u, eta);
    const double bis = 0.5 * (ch.cw + ch.ccw) - pi / 2;
    std::vector<double> radii;
    for (int k = 0; k < 5; ++k) radii.push_back(0.2 * std::pow(10.0, k / 4.0) * ctx.spread / 2);
    std::vector<cplx> zp, zn;
    for (double r : radii) {
        zp.push_back(r * std::exp(I1 * bis));
        zn.push_back(r * std::exp(I1 * (bis + pi)));
    }
    const Direction neg = opposite(eta);
    auto xe = oscillatory_frames(ctx, eta, zp);
    auto xn = oscillatory_frames(ctx, neg, zp);
    auto ye = oscillatory_frames(ctx, eta, zn);
    auto yn = oscillatory_frames(ctx, neg, zn);

    Fit vp = stacked_solve(xe, xn);
    Fit vm = stacked_solve(ye, yn);
    std::vector<Mat> fund;
    for (std::size_t s = 0; s < zp.size(); ++s) {
        Mat sz = Mat::Zero(mod.dim, mod.dim);
        for (std::size_t k = 0; k < pc.S.size(); ++k) sz += pc.S[k] * std::pow(zp[s], -double(k));
        fund.push_back(sz * operator_power(LogBranchPoint{zp[s], cplx(std::log(radii[s]), bis)}, mod.theta, mod.rho));
    }
    Fit ci = stacked_solve(fund, xn);

    MonodromyData d;
    d.eta = eta;
    d.order = lexicographic_order(u, eta);
    d.fit_residual = std::max({vp.residual, vm.residual, ci.residual});
    if (d.fit_residual > 1e-6) throw Error("fit", "frames are not related by a constant matrix");

    // the seed must not matter
    std::vector<cplx> mid{zp[2]};
    Mat a = oscillatory_frames(ctx, eta, mid, FrameMethod::automatic, 0.5)[0];
    Mat b = oscillatory_frames(ctx, neg, mid, FrameMethod::automatic, 0.5)[0];
    d.seed_change = std::max(max_abs(a - xe[2]) / max_abs(xe[2]), max_abs(b - xn[2]) / max_abs(xn[2]));
    if (d.seed_change > 1e-5) throw Error("seed", "oscillatory frame depends on the seed radius");

    d.v_plus = by_slots(vp.x, d.order);
    d.v_minus = by_slots(vm.x, d.order);
    d.c_inverse = Mat(mod.dim, mod.dim);
    for (std::size_t s = 0; s < d.order.size(); ++s) d.c_inverse.col(Eigen::Index(s)) = ci.x.col(d.order[s]);
    d.c_matrix = d.c_inverse.inverse();
    return d;
}

MonodromyData monodromy_data_from_reflections(const StokesContext& ctx, const Direction& eta, cplx m) {
    const auto& pc = ctx.periods;
    const auto& mod = pc.model;
    DistinguishedSystem sys = reference_system(pc.ss.u, eta, pc.lambda0);
    MonodromyData d;
    d.eta = eta;
    d.m = m;
    d.order = sys.targets;
    d.beta = reflection_basis(pc, m, sys, &d.betas);
    d.beta_minus = m == 0.0 ? d.beta : reflection_basis(pc, -m, sys);
    d.h = hm_matrix(pc, m);
    const cplx q = std::exp(pi * I1 * m);
    const Eigen::Index n = mod.dim;
    Mat w = Mat::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) w(i, j) = (d.beta.col(i).transpose() * d.h * d.beta_minus.col(j))(0, 0) / q;
    d.v_plus = w.inverse();
    d.v_minus = d.v_plus.transpose();
    d.c_matrix = d.beta.transpose() * mod.pairing / std::sqrt(2 * pi);
    d.c_inverse = d.c_matrix.inverse();
    for (auto& b : d.betas) d.fit_residual = std::max(d.fit_residual, b.misfit);
    return d;
}

Mat reflection_operator(const Mat& h, cplx m, const Vec& b, const Vec& b_minus) {
    const cplx q = std::exp(pi * I1 * m);
    const Eigen::Index n = b.size();
    return Mat::Identity(n, n) - b * (h * b_minus).transpose() / q;
}

WallCrossing next_wall(const Vec& u, const Direction& eta) {
    auto crit = critical_angles_mod(u);
    chamber_of(u, eta);
    double c = next_above(crit, eta.angle());
    double c2 = next_above(crit, c);
    WallCrossing w;
    w.before = eta;
    w.wall = Direction::from_angle(c);
    w.after = Direction::from_angle(0.5 * (c + c2));
    w.sequences = eta_sequences(u, w.wall);
    return w;
}

WallCrossing wall_crossing(const Vec& u, const Direction& eta, cplx m, const Mat& h, const Mat& beta_u,
                           const Mat& beta_minus_u) {
    WallCrossing wc = next_wall(u, eta);
    const cplx q = std::exp(pi * I1 * m);
    const Eigen::Index n = u.size();
    wc.w = Mat::Identity(n, n);
    wc.predicted = beta_u;
    for (auto& g : wc.sequences) {
        for (std::size_t a = 0; a < g.size(); ++a)
            for (std::size_t b = a + 1; b < g.size(); ++b)
                wc.w(g[a], g[b]) = (beta_u.col(g[a]).transpose() * h * beta_minus_u.col(g[b]))(0, 0) / q;
        Mat p = Mat::Identity(n, n);
        for (std::size_t t = 1; t < g.size(); ++t) {
            p = p * reflection_operator(h, m, beta_u.col(g[t - 1]), beta_minus_u.col(g[t - 1])).inverse();
            wc.predicted.col(g[t]) = p * beta_u.col(g[t]);
        }
    }
    return wc;
}

Mat v_minus_from_walls(const StokesContext& ctx, const Direction& eta, cplx m, std::vector<WallCrossing>* detail) {
    const auto& pc = ctx.periods;
    const Vec& u = pc.ss.u;
    const Eigen::Index n = u.size();
    const std::size_t mu = critical_directions(u).size() / 2;
    Mat h = hm_matrix(pc, m);
    Mat prod = Mat::Identity(n, n);
    Direction dir = eta;
    for (std::size_t k = 0; k < mu; ++k) {
        DistinguishedSystem sys = reference_system(u, dir, pc.lambda0);
        Mat b = columns_by_u(reflection_basis(pc, m, sys), sys.targets);
        Mat bm = m == 0.0 ? b : columns_by_u(reflection_basis(pc, -m, sys), sys.targets);
        WallCrossing wc = wall_crossing(u, dir, m, h, b, bm);
        prod = prod * wc.w.transpose();
        dir = wc.after;
        if (detail) detail->push_back(std::move(wc));
    }
    return by_slots(prod.inverse(), lexicographic_order(u, eta));
}

Mat half_twist(const Mat& h, cplx m, const Mat& beta, const Mat& beta_minus) {
    const Eigen::Index n = beta.cols();
    Mat out = beta;
    Mat p = Mat::Identity(beta.rows(), beta.rows());
    for (Eigen::Index t = 1; t < n; ++t) {
        p = p * reflection_operator(h, m, beta.col(t - 1), beta_minus.col(t - 1)).inverse();
        out.col(t) = p * beta.col(t);
    }
    return out;
}

Mat theta_exp(const Mat& theta, cplx c) {
    if (is_diagonal(theta)) {
        Mat r = Mat::Zero(theta.rows(), theta.cols());
        for (Eigen::Index k = 0; k < theta.rows(); ++k) r(k, k) = std::exp(c * theta(k, k));
        return r;
    }
    EigenFrame f = diagonalize(theta);
    return f.vectors * (c * f.values.array()).exp().matrix().asDiagonal() * f.inverse;
}

Mat central_stokes(const FrobeniusModel& model, const Mat& c_matrix, int sign) {
    const cplx a = -double(sign) * pi * I1;
    Mat ci = c_matrix.inverse();
    return ci.transpose() * model.pairing * nilpotent_exp(Mat(a * model.rho)) * theta_exp(model.theta, a) * ci;
}

Eigen::VectorXd row_signs(const Mat& a, const Mat& b) {
    Eigen::VectorXd s(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        cplx c = b.row(i).conjugate().cwiseProduct(a.row(i)).sum();
        s(i) = c.real() < 0 ? -1.0 : 1.0;
    }
    return s;
}

std::vector<Check> consistency_report(const StokesContext& ctx, const MonodromyData& an, const MonodromyData& rf,
                                      const ConsistencyOptions& opt) {
    const auto& pc = ctx.periods;
    const auto& mod = pc.model;
    const Eigen::Index n = mod.dim;
    std::vector<Check> out;
    auto add = [&](std::string name, double r, double tol) { out.push_back({std::move(name), r, tol}); };
    auto guarded = [&](const std::string& name, double tol, auto&& f) {
        try {
            add(name, f(), tol);
        } catch (const std::exception& e) {
            add(name + " [" + e.what() + "]", std::numeric_limits<double>::infinity(), tol);
        }
    };
    auto unipotent = [&](const Mat& v) {
        double r = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) r = std::max(r, std::abs(v(i, j) - (i == j ? 1.0 : 0.0)));
        return r;
    };
    const cplx q = std::exp(pi * I1 * rf.m);

    add("analytic V+ unipotent upper triangular", unipotent(an.v_plus), 1e-6);
    add("analytic V+ = V-^t", max_abs(an.v_plus - an.v_minus.transpose()), opt.tol);
    add("analytic fit residual", an.fit_residual, 1e-6);
    add("analytic seed change", an.seed_change, opt.tol);
    add("reflection V+ unipotent upper triangular", unipotent(rf.v_plus), 1e-6);
    add("reflection V+ = V-^t (by construction)", max_abs(rf.v_plus - rf.v_minus.transpose()), opt.tol);

    Eigen::VectorXd s = row_signs(an.c_matrix, rf.c_matrix);
    Mat sd = s.cast<cplx>().asDiagonal();
    add("two-way V+", max_abs(an.v_plus - sd * rf.v_plus * sd), opt.tol);
    add("two-way C", max_abs(an.c_matrix - sd * rf.c_matrix) / max_abs(an.c_matrix), opt.tol);

    add("analytic V+ = C^-t g e^{-pi i rho} e^{-pi i theta} C^-1",
        max_abs(an.v_plus - central_stokes(mod, an.c_matrix, 1)), opt.tol);
    add("analytic V- = C^-t g e^{pi i rho} e^{pi i theta} C^-1",
        max_abs(an.v_minus - central_stokes(mod, an.c_matrix, -1)), opt.tol);
    add("reflection V+ = C^-t g e^{-pi i rho} e^{-pi i theta} C^-1",
        max_abs(rf.v_plus - central_stokes(mod, rf.c_matrix, 1)), opt.tol);

    Mat gram = rf.beta.transpose() * euler_matrix(mod) * rf.beta;
    add("euler gram of beta = analytic V+^-1", max_abs(gram - sd * an.v_plus.inverse() * sd), opt.tol);
    Mat vi = rf.v_plus.inverse();
    add("beta(m)^t h beta(-m) = q V+^-1 + q^-1 V+^-t",
        max_abs(rf.beta.transpose() * rf.h * rf.beta_minus - (q * vi + vi.transpose() / q)), opt.tol);

    // h_m can be degenerate at special m (h_0 on P^1); the relation holds at every m, so move away then
    guarded("dual vectors = central columns", opt.tol, [&] {
        cplx m = rf.m;
        Mat h = rf.h, bm = rf.beta_minus;
        if (inverse_condition(h * bm) < 1e-8) {
            m = rf.m + 0.3;
            DistinguishedSystem sys = reference_system(pc.ss.u, rf.eta, pc.lambda0);
            h = hm_matrix(pc, m);
            bm = reflection_basis(pc, -m, sys);
        }
        const cplx qm = std::exp(pi * I1 * m);
        Mat dual = dual_reflection_basis(h, bm);
        Mat f = qm * theta_exp(mod.theta, -pi * I1) * nilpotent_exp(Mat(-pi * I1 * mod.rho)) +
                theta_exp(mod.theta, pi * I1) * nilpotent_exp(Mat(pi * I1 * mod.rho)) / qm;
        Mat pred = std::sqrt(2 * pi) * f.inverse() * an.c_inverse * sd;
        return max_abs(dual - pred) / max_abs(dual);
    });

    if (opt.walls)
        guarded("V- from wall-crossing product", opt.tol, [&] {
            Mat vm = v_minus_from_walls(ctx, rf.eta, rf.m);
            return max_abs(vm - rf.v_minus);
        });
    if (opt.half_twist)
        guarded("half-twist reflection vectors", opt.tol, [&] {
            Mat pred = half_twist(rf.h, rf.m, rf.beta, rf.beta_minus);
            DistinguishedSystem sys = reference_system(pc.ss.u, opposite_ccw(rf.eta), pc.lambda0);
            Mat got = columns_by_u(reflection_basis(pc, rf.m, sys), sys.targets);
            Mat want = columns_by_u(pred, rf.order);
            return max_abs(got - want) / max_abs(want);
        });
    return out;
}

}  // namespace fmon
