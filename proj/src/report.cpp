#include "fmon/report.hpp"

#include "fmon/numerics.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>

#ifndef FMON_VERSION
#define FMON_VERSION "unknown"
#endif

namespace fmon {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Check flag(std::string name, bool ok) { return {std::move(name), ok ? 0.0 : 1.0, 0.0}; }

double relative(const Mat& a, const Mat& b) { return max_abs(a - b) / std::max(1.0, max_abs(b)); }

Mat as_complex(const KMat& a) { return a.cast<double>().cast<cplx>(); }

// X with F^t chi X = s I, exact
KMat dual_coordinates(int n, const KMat& f, std::int64_t s) {
    const KMat a = f.transpose() * chi_matrix(n);
    Eigen::MatrixXd x = s * a.cast<double>().inverse();
    KMat r = x.array().round().cast<std::int64_t>().matrix();
    if (a * r != s * KMat::Identity(a.rows(), a.cols())) throw Error("lattice", "matched classes are not unimodular");
    return r;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

}  // namespace

std::string engine_version() { return FMON_VERSION; }

bool VerificationReport::pass() const {
    if (!errors.empty()) return false;
    for (const auto& c : checks)
        if (!c.pass()) return false;
    return true;
}

Eigen::VectorXd gram_signs(const Mat& gram) {
    const Eigen::Index N = gram.rows();
    Eigen::VectorXd s = Eigen::VectorXd::Ones(N);
    for (Eigen::Index i = N - 2; i >= 0; --i)
        for (Eigen::Index j = i + 1; j < N; ++j)
            if (std::abs(gram(i, j)) > 0.5) {
                s(i) = gram(i, j).real() * s(j) < 0 ? -1.0 : 1.0;
                break;
            }
    return s;
}

VerificationReport verify_dubrovin(const FrobeniusModel& model, const VerifyOptions& opt) {
    VerificationReport r;
    r.model = model.descriptor();
    r.eta = Direction::from_angle(opt.eta_angle);
    r.m = opt.m;
    r.ktheory = model.has_ktheory();

    auto stage = [&](const std::string& name, const std::function<void()>& fn) {
        auto t0 = std::chrono::steady_clock::now();
        bool ok = true;
        try {
            fn();
        } catch (const std::exception& e) {
            r.errors.push_back(name + ": " + e.what());
            ok = false;
        }
        r.timings.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        return ok;
    };

    stage("model", [&] {
        for (auto c : model_checks(model)) {
            c.name = "model: " + c.name;
            r.checks.push_back(c);
        }
    });

    StokesContext ctx;
    if (!stage("canonical data", [&] {
            ctx = make_stokes_context(make_period_context(model, canonical_data(model)), opt.order);
            r.u = ctx.periods.ss.u;
        }))
        return r;
    const PeriodContext& pc = ctx.periods;
    const int N = model.dim;
    const cplx qm = std::exp(pi * I1 * opt.m);

    DistinguishedSystem sys;
    if (!stage("reference system", [&] {
            sys = reference_system(r.u, r.eta, pc.lambda0);
            r.order = sys.targets;
            r.defects = system_defects(sys, r.u);
            r.checks.push_back({"reference paths distinguished", double(r.defects.size()), 0.0});
        }))
        return r;

    r.have_reflections = stage("reflection vectors", [&] {
        r.reflections = monodromy_data_from_reflections(ctx, r.eta, opt.m);
        const MonodromyData& d = r.reflections;
        r.checks.push_back({"h_m = q <a,b> + q^-1 <b,a>", relative(d.h, hm_closed_form(model, opt.m)), 1e-6});
        double norm = 0.0, eig = 0.0, refl = 0.0;
        std::mt19937 gen(opt.seed);
        std::normal_distribution<double> g;
        for (int i = 0; i < N; ++i) {
            norm = std::max(norm, std::abs((d.beta.col(i).transpose() * d.h * d.beta_minus.col(i))(0, 0) - (qm + 1.0 / qm)));
            const Mat& mono = d.betas[i].monodromy;
            Eigen::ComplexEigenSolver<Mat> es(mono);
            Eigen::VectorXcd ev = es.eigenvalues();
            // one eigenvalue -q^-2, the rest 1
            Eigen::Index k;
            (ev.array() + 1.0 / (qm * qm)).abs().minCoeff(&k);
            for (Eigen::Index j = 0; j < N; ++j)
                eig = std::max(eig, std::abs(ev(j) - (j == k ? -1.0 / (qm * qm) : cplx(1.0))));
            Mat refop = reflection_operator(d.h, opt.m, d.beta.col(i), d.beta_minus.col(i));
            for (int t = 0; t < 3; ++t) {
                Vec a(N);
                for (auto& x : a) x = cplx(g(gen), g(gen));
                Vec ra = refop * a;
                refl = std::max(refl, (mono * a - ra).norm() / (a.norm() + ra.norm()));
            }
        }
        r.checks.push_back({"h_m(beta_i(m), beta_i(-m)) = q + q^-1", norm, 1e-6});
        r.checks.push_back({"local monodromy eigenvalues -q^-2 and 1", eig, 1e-6});
        r.checks.push_back({"local monodromy is the reflection in beta_i", refl, opt.tol});
    });

    if (r.have_reflections) {
        stage("m independence", [&] {
            Mat b = reflection_basis(pc, opt.m + 0.3, sys);
            r.checks.push_back({"beta(m) = beta(m + 0.3)", relative(b, r.reflections.beta), opt.tol});
        });
    }

    r.have_analytic = stage("oscillatory solutions", [&] { r.analytic = monodromy_data_analytic(ctx, r.eta); });

    if (r.have_analytic && r.have_reflections) {
        stage("consistency", [&] {
            ConsistencyOptions co;
            co.tol = opt.tol;
            co.walls = opt.walls;
            co.half_twist = opt.half_twist;
            for (auto& c : consistency_report(ctx, r.analytic, r.reflections, co)) r.checks.push_back(c);
        });
    }

    if (!r.have_reflections) return r;
    const Mat raw = r.reflections.beta;
    Mat raw_gram = raw.transpose() * euler_matrix(model) * raw;
    r.signs = gram_signs(raw_gram);
    const Mat sdiag = r.signs.cast<cplx>().asDiagonal();
    r.beta = raw * sdiag;
    r.gram = sdiag * raw_gram * sdiag;
    {
        Mat rounded = r.gram.real().array().round().cast<cplx>().matrix();
        r.checks.push_back({"Euler Gram of beta is integral", max_abs(r.gram - rounded), opt.integer_tol});
    }

    if (!r.ktheory) return r;
    stage("ktheory", [&] {
        const int n = model.projective_n;
        const cplx q = model.novikov;
        r.match = match_integer_classes(integral_structure_matrix(n, q), r.beta, opt.integer_tol, opt.coefficient_bound);
        r.checks.push_back({"beta_i = Psi_Q(F_i) with integer F_i", r.match.rounding_error, opt.integer_tol});
        r.checks.push_back({"integer coordinates within bound", double(r.match.largest), double(opt.coefficient_bound)});
        if (!r.match.found) return;
        ExceptionalCollection f = from_columns(n, r.match.coords);
        r.chi_gram = f.gram();
        r.checks.push_back(flag("F is exceptional", f.exceptional()));
        r.checks.push_back({"chi Gram of F = Euler Gram of beta", max_abs(as_complex(r.chi_gram) - r.gram), opt.integer_tol});

        // back to raw signs, then E_i with chi(F_j, E_i^vee) = s delta_ij
        KMat fraw = r.match.coords;
        for (int i = 0; i < N; ++i) fraw.col(i) *= std::int64_t(r.signs(i));
        const int shift = (n - n % 2) / 2;
        const std::int64_t s = shift % 2 ? -1 : 1;
        KMat x = dual_coordinates(n, fraw, s);
        r.refined.resize(N, N);
        for (int i = 0; i < N; ++i) r.refined.col(i) = dual_class(n, x.col(i));
        ExceptionalCollection e = from_columns(n, r.refined);
        r.checks.push_back(flag("E is exceptional", e.exceptional()));
        r.checks.push_back({"chi Gram of E = V+", max_abs(as_complex(e.gram()) - r.reflections.v_plus), opt.integer_tol});
        Mat am = integral_structure_matrix(n, q, IntegralMap::a_minus) * as_complex(r.refined);
        r.checks.push_back({"A-(E_i) = columns of C^-1", relative(am, r.reflections.c_inverse), opt.tol});
        ExceptionalCollection rev{n, {}};
        for (int i = N - 1; i >= 0; --i) rev.classes.push_back(x.col(i));
        r.checks.push_back(flag("left Koszul dual of F = (E_N^v, ..., E_1^v) up to shift",
                                left_koszul_dual(from_columns(n, fraw)) == shifted(rev, shift)));
    });
    return r;
}

BraidReport braid_check(const StokesContext& ctx, const Direction& eta, cplx m, const MutationWord& word) {
    const PeriodContext& pc = ctx.periods;
    const FrobeniusModel& model = pc.model;
    BraidReport r;
    r.word = word;
    r.system = reference_system(pc.ss.u, eta, pc.lambda0);
    r.beta_before = reflection_basis(pc, m, r.system);
    for (auto [i, side] : word) r.system = braid_move(r.system, pc.ss.u, i, side);
    r.defects = system_defects(r.system, pc.ss.u);
    r.beta = reflection_basis(pc, m, r.system);
    r.ktheory = model.has_ktheory();
    if (!r.ktheory) return r;
    const int n = model.projective_n;
    Mat images = integral_structure_matrix(n, model.novikov);
    r.before = match_integer_classes(images, r.beta_before);
    r.after = match_integer_classes(images, r.beta);
    if (!r.before.found) {
        r.lattice_error = inf;
        return r;
    }
    r.predicted = apply_word(from_columns(n, r.before.coords), word).columns();
    Mat x = images.colPivHouseholderQr().solve(r.beta);
    r.lattice_error = max_abs(x - as_complex(r.predicted));
    return r;
}

nlohmann::json matrix_json(const Mat& a) {
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        nlohmann::json rr = nlohmann::json::array(), ri = nlohmann::json::array();
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            rr.push_back(a(i, j).real());
            ri.push_back(a(i, j).imag());
        }
        re.push_back(rr);
        im.push_back(ri);
    }
    return {{"re", re}, {"im", im}};
}

nlohmann::json matrix_json(const KMat& a) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
        out.push_back(row);
    }
    return out;
}

nlohmann::json checks_json(const std::vector<Check>& c) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& x : c) {
        nlohmann::json e = {{"name", x.name}, {"tol", x.tol}, {"pass", x.pass()}};
        // inf and nan have no JSON spelling
        if (std::isfinite(x.residual))
            e["residual"] = x.residual;
        else
            e["residual"] = nullptr;
        out.push_back(e);
    }
    return out;
}

namespace {

nlohmann::json monodromy_json(const MonodromyData& d) {
    return {{"v_plus", matrix_json(d.v_plus)}, {"v_minus", matrix_json(d.v_minus)}, {"c", matrix_json(d.c_matrix)}};
}

}  // namespace

nlohmann::json report_json(const VerificationReport& r, bool timings) {
    nlohmann::json j;
    j["schema_version"] = report_schema_version;
    j["engine"] = engine_version();
    j["model"] = r.model;
    j["eta_angle"] = r.eta.angle();
    j["m"] = {r.m.real(), r.m.imag()};
    j["u"] = matrix_json(Mat(r.u));
    j["lex_order"] = r.order;
    j["path_defects"] = r.defects;
    if (r.have_reflections) {
        j["beta"] = matrix_json(r.beta);
        j["beta_signs"] = std::vector<double>(r.signs.data(), r.signs.data() + r.signs.size());
        j["euler_gram"] = matrix_json(r.gram);
        j["reflections"] = monodromy_json(r.reflections);
    }
    if (r.have_analytic) j["analytic"] = monodromy_json(r.analytic);
    j["residuals"] = checks_json(r.checks);
    if (!r.ktheory) {
        j["ktheory"] = "not applicable";
    } else {
        nlohmann::json k;
        k["match_found"] = r.match.found;
        k["rounding_error"] = r.match.rounding_error;
        k["largest_coefficient"] = r.match.largest;
        k["basis"] = "O(0), ..., O(n)";
        if (r.match.coords.size()) k["classes"] = matrix_json(r.match.coords);
        if (r.chi_gram.size()) k["chi_gram"] = matrix_json(r.chi_gram);
        if (r.refined.size()) k["refined_classes"] = matrix_json(r.refined);
        j["ktheory"] = k;
    }
    if (timings) {
        nlohmann::json t = nlohmann::json::object();
        for (const auto& [name, sec] : r.timings) t[name] = sec;
        j["timings_s"] = t;
    }
    j["errors"] = r.errors;
    j["pass"] = r.pass();
    return j;
}

nlohmann::json braid_json(const BraidReport& r) {
    nlohmann::json j;
    j["schema_version"] = report_schema_version;
    j["engine"] = engine_version();
    j["word"] = word_text(r.word);
    j["lex_order_after"] = r.system.targets;
    j["path_defects"] = r.defects;
    j["beta_before"] = matrix_json(r.beta_before);
    j["beta"] = matrix_json(r.beta);
    if (!r.ktheory) {
        j["ktheory"] = "not applicable";
        return j;
    }
    j["ktheory"] = {{"classes_before", matrix_json(r.before.coords)},
                    {"classes_after", matrix_json(r.after.coords)},
                    {"predicted", matrix_json(r.predicted)},
                    {"rounding_error_before", r.before.rounding_error},
                    {"rounding_error_after", r.after.rounding_error}};
    if (std::isfinite(r.lattice_error))
        j["ktheory"]["lattice_error"] = r.lattice_error;
    else
        j["ktheory"]["lattice_error"] = nullptr;
    return j;
}

std::vector<Ray> stokes_rays(const Vec& u, const Direction& eta) {
    std::vector<Ray> out;
    for (Eigen::Index i = 0; i < u.size(); ++i) out.push_back({u(i), eta.eta});
    return out;
}

std::string render_svg(const DistinguishedSystem& sys, const Vec& u, const std::vector<Ray>& rays) {
    const double size = 800.0, margin = 40.0;
    double ext = sys.lambda0;
    for (Eigen::Index i = 0; i < u.size(); ++i) ext = std::max(ext, std::abs(u(i)));
    for (const auto& p : sys.paths)
        for (cplx w : p.waypoints) ext = std::max(ext, std::abs(w));
    if (ext <= 0.0) ext = 1.0;
    ext *= 1.1;
    const double scale = (size / 2 - margin) / ext;
    auto X = [&](cplx z) { return fmt(size / 2 + scale * z.real()); };
    auto Y = [&](cplx z) { return fmt(size / 2 - scale * z.imag()); };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n";
    s += "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
    s += "<line class=\"axis\" x1=\"0\" y1=\"400.00\" x2=\"800\" y2=\"400.00\" stroke=\"#bbbbbb\"/>\n";
    s += "<line class=\"axis\" x1=\"400.00\" y1=\"0\" x2=\"400.00\" y2=\"800\" stroke=\"#bbbbbb\"/>\n";
    s += "<circle class=\"base-circle\" cx=\"400.00\" cy=\"400.00\" r=\"" + fmt(scale * sys.lambda0) +
         "\" fill=\"none\" stroke=\"#888888\" stroke-dasharray=\"4 4\"/>\n";
    for (const auto& ray : rays) {
        cplx d = ray.direction / std::abs(ray.direction);
        cplx end = ray.origin + 3.0 * ext * d;
        s += "<line class=\"stokes-ray\" x1=\"" + X(ray.origin) + "\" y1=\"" + Y(ray.origin) + "\" x2=\"" + X(end) +
             "\" y2=\"" + Y(end) + "\" stroke=\"#999999\" stroke-dasharray=\"2 3\"/>\n";
    }
    for (std::size_t k = 0; k < sys.paths.size(); ++k) {
        std::string pts;
        for (cplx w : sys.paths[k].waypoints) {
            if (!pts.empty()) pts += ' ';
            pts += X(w) + "," + Y(w);
        }
        s += "<polyline class=\"path\" points=\"" + pts + "\" fill=\"none\" stroke=\"" + palette[k % 8] +
             "\" stroke-width=\"1.5\"/>\n";
    }
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        s += "<circle class=\"u-point\" cx=\"" + X(u(i)) + "\" cy=\"" + Y(u(i)) + "\" r=\"4\" fill=\"black\"/>\n";
        s += "<text x=\"" + X(u(i) + 8.0 / scale) + "\" y=\"" + Y(u(i) - 8.0 / scale * I1) +
             "\" font-size=\"14\" font-family=\"sans-serif\">u" + std::to_string(i + 1) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace fmon
