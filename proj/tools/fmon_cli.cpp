#include "fmon/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <regex>

using namespace fmon;
using nlohmann::json;

namespace {

struct Globals {
    std::string model = "p1";
    std::optional<double> q_arg;
    double tol = 1e-5;
    int order = 40;
    double m = 0.0;
    double eta_angle = 2 * pi / 3;
    std::string out;
    bool no_timings = false;
    std::string word;
};

FrobeniusModel pick_model(const Globals& g) {
    std::smatch mt;
    static const std::regex builtin("[pP]([0-9]+)");
    if (std::regex_match(g.model, mt, builtin)) {
        int n = std::stoi(mt[1]);
        if (n < 1) throw Error("model", "P^n needs n >= 1");
        double a = g.q_arg ? *g.q_arg : (n == 1 ? 0.0 : 0.2);
        return qh_projective_space(n, std::exp(I1 * a));
    }
    return load_model(g.model);
}

void emit(const Globals& g, const std::string& text) {
    if (g.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(g.out);
    if (!f) throw Error("io", "cannot write " + g.out);
    f << text;
    if (!f) throw Error("io", "write failed for " + g.out);
}

json header(const std::string& command, const FrobeniusModel& model) {
    return {{"schema_version", report_schema_version},
            {"engine", engine_version()},
            {"command", command},
            {"model", model.descriptor()}};
}

bool all_pass(const std::vector<Check>& c) {
    for (const auto& x : c)
        if (!x.pass()) return false;
    return true;
}

int finish(const Globals& g, json j, bool pass) {
    j["pass"] = pass;
    emit(g, j.dump(2) + "\n");
    return pass ? 0 : 1;
}

StokesContext context(const FrobeniusModel& model, const Globals& g) {
    return make_stokes_context(make_period_context(model, canonical_data(model)), g.order);
}

int cmd_validate(const Globals& g) {
    FrobeniusModel model = pick_model(g);
    auto checks = model_checks(model);
    json j = header("model validate", model);
    j["dim"] = model.dim;
    j["ktheory"] = model.has_ktheory() ? "P^" + std::to_string(model.projective_n) : "not applicable";
    j["residuals"] = checks_json(checks);
    return finish(g, j, all_pass(checks));
}

int cmd_export(const Globals& g) {
    emit(g, model_to_text(pick_model(g)) + "\n");
    return 0;
}

int cmd_reflect(const Globals& g) {
    FrobeniusModel model = pick_model(g);
    StokesContext ctx = context(model, g);
    const PeriodContext& pc = ctx.periods;
    Direction eta = Direction::from_angle(g.eta_angle);
    DistinguishedSystem sys = reference_system(pc.ss.u, eta, pc.lambda0);
    std::vector<ReflectionVector> det;
    Mat beta = reflection_basis(pc, g.m, sys, &det);
    std::vector<Check> checks;
    auto defects = system_defects(sys, pc.ss.u);
    checks.push_back({"reference paths distinguished", double(defects.size()), 0.0});
    double misfit = 0.0;
    std::vector<int> spiral;
    for (const auto& r : det) {
        misfit = std::max(misfit, r.misfit);
        spiral.push_back(r.spiral_exponent);
    }
    checks.push_back({"reflection vector fit", misfit, 1e-6});
    Mat gram = beta.transpose() * euler_matrix(model) * beta;
    double lower = 0.0;
    for (Eigen::Index i = 0; i < gram.rows(); ++i)
        for (Eigen::Index j = 0; j <= i; ++j) lower = std::max(lower, std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)));
    checks.push_back({"Euler Gram unipotent upper triangular", lower, g.tol});
    json j = header("reflect", model);
    j["eta_angle"] = eta.angle();
    j["m"] = g.m;
    j["u"] = matrix_json(Mat(pc.ss.u));
    j["lex_order"] = sys.targets;
    j["path_defects"] = defects;
    j["spiral_exponents"] = spiral;
    j["beta"] = matrix_json(beta);
    j["euler_gram"] = matrix_json(gram);
    j["residuals"] = checks_json(checks);
    return finish(g, j, all_pass(checks));
}

int cmd_monodromy(const Globals& g) {
    FrobeniusModel model = pick_model(g);
    StokesContext ctx = context(model, g);
    Direction eta = Direction::from_angle(g.eta_angle);
    MonodromyData an = monodromy_data_analytic(ctx, eta);
    MonodromyData rf = monodromy_data_from_reflections(ctx, eta, g.m);
    ConsistencyOptions co;
    co.tol = g.tol;
    auto checks = consistency_report(ctx, an, rf, co);
    json j = header("monodromy", model);
    j["eta_angle"] = eta.angle();
    j["m"] = g.m;
    j["lex_order"] = an.order;
    j["analytic"] = {{"v_plus", matrix_json(an.v_plus)}, {"v_minus", matrix_json(an.v_minus)}, {"c", matrix_json(an.c_matrix)}};
    j["reflections"] = {{"v_plus", matrix_json(rf.v_plus)}, {"v_minus", matrix_json(rf.v_minus)}, {"c", matrix_json(rf.c_matrix)}};
    j["residuals"] = checks_json(checks);
    return finish(g, j, all_pass(checks));
}

int cmd_stokes(const Globals& g) {
    FrobeniusModel model = pick_model(g);
    StokesContext ctx = context(model, g);
    const Vec& u = ctx.periods.ss.u;
    Direction eta = Direction::from_angle(g.eta_angle);
    json j = header("stokes", model);
    j["eta_angle"] = eta.angle();
    json crit = json::array();
    for (const auto& d : critical_directions(u)) crit.push_back(d.angle());
    j["critical_angles"] = crit;
    Chamber ch = chamber_of(u, eta);
    Sector sec = sector_of(u, eta);
    j["chamber"] = {ch.cw, ch.ccw};
    j["sector"] = {sec.lo, sec.hi};
    j["lex_order"] = lexicographic_order(u, eta);
    json pins = json::array();
    for (int i = 0; i < model.dim; ++i) {
        Pinning p = pin_column(ctx, eta, i);
        pins.push_back({{"angle", p.angle}, {"margin", p.margin}, {"pinnable", p.pinnable()}});
    }
    j["pinning"] = pins;
    std::vector<WallCrossing> walls;
    Mat vm = v_minus_from_walls(ctx, eta, g.m, &walls);
    json wj = json::array();
    for (const auto& w : walls) wj.push_back({{"wall_angle", w.wall.angle()}, {"w", matrix_json(w.w)}});
    j["walls"] = wj;
    j["v_minus_from_walls"] = matrix_json(vm);
    MonodromyData an = monodromy_data_analytic(ctx, eta);
    std::vector<Check> checks{{"V- from walls = analytic V-", max_abs(vm - an.v_minus), g.tol}};
    j["residuals"] = checks_json(checks);
    return finish(g, j, all_pass(checks));
}

int cmd_verify(const Globals& g) {
    FrobeniusModel model = pick_model(g);
    VerifyOptions o;
    o.eta_angle = g.eta_angle;
    o.m = g.m;
    o.tol = g.tol;
    o.order = g.order;
    VerificationReport r = verify_dubrovin(model, o);
    json j = report_json(r, !g.no_timings);
    j["command"] = "verify-dubrovin";
    emit(g, j.dump(2) + "\n");
    return r.pass() ? 0 : 1;
}

int cmd_braid(const Globals& g) {
    FrobeniusModel model = pick_model(g);
    StokesContext ctx = context(model, g);
    BraidReport r = braid_check(ctx, Direction::from_angle(g.eta_angle), g.m, parse_word(g.word));
    json j = braid_json(r);
    j["command"] = "braid";
    j["model"] = model.descriptor();
    std::vector<Check> checks;
    if (r.ktheory) {
        checks.push_back({"re-extracted classes = mutated classes", r.lattice_error, 1e-4});
        checks.push_back({"classes before the moves are integral", r.before.rounding_error, 1e-4});
    }
    j["residuals"] = checks_json(checks);
    return finish(g, j, all_pass(checks));
}

int cmd_render(const Globals& g) {
    FrobeniusModel model = pick_model(g);
    PeriodContext pc = make_period_context(model, canonical_data(model));
    Direction eta = Direction::from_angle(g.eta_angle);
    DistinguishedSystem sys = reference_system(pc.ss.u, eta, pc.lambda0);
    for (auto [i, side] : parse_word(g.word)) sys = braid_move(sys, pc.ss.u, i, side);
    emit(g, render_svg(sys, pc.ss.u, stokes_rays(pc.ss.u, eta)));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"monodromy data of semisimple Frobenius manifolds"};
    app.set_version_flag("--version", engine_version());
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--model", g.model, "p<n> for quantum cohomology of P^n, or a model file")->capture_default_str();
    app.add_option("--q-arg", g.q_arg, "q = e^{i q_arg} for the built-in P^n (default 0 for n = 1, 0.2 otherwise)");
    app.add_option("--tol", g.tol, "tolerance of the numeric identities")->capture_default_str();
    app.add_option("--order", g.order, "terms of the R-series")->capture_default_str()->check(CLI::Range(4, 200));
    app.add_option("--m", g.m, "twist parameter of the periods")->capture_default_str();
    app.add_option("--eta-angle", g.eta_angle, "argument of the admissible direction")->capture_default_str();
    app.add_option("--out", g.out, "output file (default stdout)");
    app.add_flag("--no-timings", g.no_timings, "leave timings out of the report");

    std::function<int()> run;
    auto* model = app.add_subcommand("model", "model files");
    model->require_subcommand(1);
    model->add_subcommand("validate", "check the Frobenius axioms")->callback([&] { run = [&] { return cmd_validate(g); }; });
    model->add_subcommand("export", "write the model file")->callback([&] { run = [&] { return cmd_export(g); }; });
    app.add_subcommand("reflect", "reflection vectors of the reference system")->callback([&] {
        run = [&] { return cmd_reflect(g); };
    });
    app.add_subcommand("monodromy", "Stokes and central connection matrices both ways")->callback([&] {
        run = [&] { return cmd_monodromy(g); };
    });
    app.add_subcommand("stokes", "critical directions, pinning and wall-crossing")->callback([&] {
        run = [&] { return cmd_stokes(g); };
    });
    app.add_subcommand("verify-dubrovin", "full verification report")->callback([&] { run = [&] { return cmd_verify(g); }; });
    auto* braid = app.add_subcommand("braid", "braid moves against lattice mutations");
    braid->add_option("--word", g.word, "generators such as \"L1 R2\"")->required();
    braid->callback([&] { run = [&] { return cmd_braid(g); }; });
    auto* render = app.add_subcommand("render", "SVG of the reference system");
    render->add_option("--word", g.word, "braid moves applied first");
    render->callback([&] { run = [&] { return cmd_render(g); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        return run();
    } catch (const std::exception& e) {
        std::cerr << "fmon: " << e.what() << "\n";
        return 2;
    }
}
