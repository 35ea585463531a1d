#pragma once

#include "fmon/periods.hpp"

namespace fmon {

struct StokesContext {
    PeriodContext periods;
    std::vector<Mat> R;  // R_0..R_K in the u order of periods.ss
    double spread = 0.0;
    double ode_tol = 1e-12;
};

StokesContext make_stokes_context(const PeriodContext& periods, int r_order = 40);

// neighbouring critical angles cw < eta.angle() < ccw, continuous with eta
struct Chamber {
    double cw = 0.0, ccw = 0.0;
};
Chamber chamber_of(const Vec& u, const Direction& eta);

// eta rotated clockwise by pi
Direction opposite(const Direction& eta);
// eta rotated counter-clockwise by pi
Direction opposite_ccw(const Direction& eta);

// X(eta) lives on arg z in (cw + pi/2, ccw + 3pi/2)
struct Sector {
    double lo = 0.0, hi = 0.0;
};
Sector sector_of(const Vec& u, const Direction& eta);

enum class FrameMethod { automatic, ode, laplace };

// best direction in the sector along which column i is recessive; margin < 0.05 means not pinnable
struct Pinning {
    double angle = 0.0;
    double margin = -1.0;
    bool pinnable() const { return margin >= 0.05; }
};
Pinning pin_column(const StokesContext& ctx, const Direction& eta, int i);

// X(eta, z) with columns in the u order of ctx; one matrix per sample point
std::vector<Mat> oscillatory_frames(const StokesContext& ctx, const Direction& eta, const std::vector<cplx>& z,
                                    FrameMethod method = FrameMethod::automatic, double seed_scale = 1.0);
Mat oscillatory_frame(const StokesContext& ctx, const Direction& eta, cplx z,
                      FrameMethod method = FrameMethod::automatic);

// |z dX/dz - (theta - E/z) X| / |X| with a five point difference
double frame_equation_residual(const StokesContext& ctx, const Direction& eta, cplx z,
                               FrameMethod method = FrameMethod::automatic);

struct MonodromyData {
    Mat v_plus, v_minus;
    Mat c_matrix, c_inverse;  // X(-eta) = S z^theta z^-rho C^-1
    Direction eta;
    std::vector<int> order;  // slot -> u index
    cplx m = 0.0;
    Mat beta, beta_minus, h;  // reflection side only: slot columns at m and -m, h_m matrix
    std::vector<ReflectionVector> betas;
    double fit_residual = 0.0;
    double seed_change = 0.0;
};

MonodromyData monodromy_data_analytic(const StokesContext& ctx, const Direction& eta);
MonodromyData monodromy_data_from_reflections(const StokesContext& ctx, const Direction& eta, cplx m);

// a -> a - q^-1 h(a, b_minus) b
Mat reflection_operator(const Mat& h, cplx m, const Vec& b, const Vec& b_minus);

struct WallCrossing {
    Direction before, wall, after;
    std::vector<std::vector<int>> sequences;
    Mat w;          // u index
    Mat predicted;  // reflection vectors of `after` at m, columns by u index
};

// the next critical direction counter-clockwise from eta, and an admissible direction just past it
WallCrossing next_wall(const Vec& u, const Direction& eta);
// betas by u index
WallCrossing wall_crossing(const Vec& u, const Direction& eta, cplx m, const Mat& h, const Mat& beta_u,
                           const Mat& beta_minus_u);

// V_- of eta from the wall matrices met while rotating eta by pi counter-clockwise, slot order
Mat v_minus_from_walls(const StokesContext& ctx, const Direction& eta, cplx m,
                       std::vector<WallCrossing>* detail = nullptr);

// reflection vectors along the system of eta rotated by pi, predicted from those of eta (slot order of eta)
Mat half_twist(const Mat& h, cplx m, const Mat& beta, const Mat& beta_minus);

// e^{c theta} e^{c rho}-type factors
Mat theta_exp(const Mat& theta, cplx c);
Mat central_stokes(const FrobeniusModel& model, const Mat& c_matrix, int sign);

// simultaneous column sign flips taking b towards a; a_row_scale * b ~ a
Eigen::VectorXd row_signs(const Mat& a, const Mat& b);

struct ConsistencyOptions {
    double tol = 1e-5;
    bool walls = true;
    bool half_twist = true;
};
std::vector<Check> consistency_report(const StokesContext& ctx, const MonodromyData& analytic,
                                      const MonodromyData& reflections, const ConsistencyOptions& opt = {});

}  // namespace fmon
