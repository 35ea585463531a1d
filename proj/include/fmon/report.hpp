#pragma once

#include "fmon/ktheory.hpp"
#include "fmon/stokes.hpp"

#include <json.hpp>

#include <cstdint>
#include <utility>

namespace fmon {

inline constexpr int report_schema_version = 1;

// git describe of the build
std::string engine_version();

struct VerifyOptions {
    double eta_angle = 2 * pi / 3;
    cplx m = 0.0;
    double tol = 1e-5;
    double integer_tol = 1e-4;
    std::int64_t coefficient_bound = 50;
    int order = 40;  // R-series terms
    bool walls = true;
    bool half_twist = true;
    std::uint32_t seed = 1;  // random test vectors
};

struct VerificationReport {
    std::string model;
    Direction eta;
    cplx m = 0.0;
    Vec u;
    std::vector<int> order;  // slot -> u index
    std::vector<std::string> defects;
    Mat beta;                // slot order, columns multiplied by signs
    Eigen::VectorXd signs;   // see gram_signs
    Mat gram;                // Euler pairing of beta
    MonodromyData analytic, reflections;
    bool have_analytic = false, have_reflections = false;
    std::vector<Check> checks;

    bool ktheory = false;
    IntegerMatch match;  // classes of the sign normalised beta
    KMat chi_gram;
    KMat refined;        // E_i with Gram V_+ and image C^-1, raw signs

    std::vector<std::pair<std::string, double>> timings;  // seconds
    std::vector<std::string> errors;

    bool pass() const;
};

// stages that throw are recorded in errors and the rest still runs where it can
VerificationReport verify_dubrovin(const FrobeniusModel& model, const VerifyOptions& opt = {});

// s = +-1 with diag(s) G diag(s) having a positive first non-zero entry right of the diagonal in each row
Eigen::VectorXd gram_signs(const Mat& gram);

struct BraidReport {
    MutationWord word;
    DistinguishedSystem system;  // after the moves
    std::vector<std::string> defects;
    Mat beta_before, beta;       // raw signs
    bool ktheory = false;
    IntegerMatch before, after;
    KMat predicted;              // lattice mutation of the classes before
    double lattice_error = 0.0;  // re-extracted coordinates against predicted
};
BraidReport braid_check(const StokesContext& ctx, const Direction& eta, cplx m, const MutationWord& word);

nlohmann::json matrix_json(const Mat& a);
nlohmann::json matrix_json(const KMat& a);
nlohmann::json checks_json(const std::vector<Check>& c);
nlohmann::json report_json(const VerificationReport& r, bool timings = true);
nlohmann::json braid_json(const BraidReport& r);

struct Ray {
    cplx origin;
    cplx direction;
};
// u_i + t eta, t >= 0
std::vector<Ray> stokes_rays(const Vec& u, const Direction& eta);
// 800 x 800, lambda plane with y up
std::string render_svg(const DistinguishedSystem& sys, const Vec& u, const std::vector<Ray>& rays);

}  // namespace fmon
