#pragma once

#include "fmon/types.hpp"

#include <string>

namespace fmon {

// flat-basis data of a Frobenius structure at one semisimple point
struct FrobeniusModel {
    int dim = 0;
    cplx conformal_dim = 0.0;
    Mat pairing;
    Mat theta;
    Mat rho;
    std::vector<Mat> mult;  // mult[i] = phi_i * (.), mult[0] is the unit
    Mat euler_mult;
    Vec base_point;
    std::vector<Mat> calibration;  // S_0..S_L as supplied by a model file
    cplx novikov = 1.0;
    int projective_n = 0;  // n >= 1 marks the built-in quantum cohomology of P^n

    bool has_ktheory() const { return projective_n > 0; }
    std::string descriptor() const;
};

struct SemisimpleData {
    Vec u;
    Vec delta;
    Mat psi;                 // column i = sqrt(delta_i) d/du_i in flat coordinates
    std::vector<int> order;  // order[k] = original eigen index placed in slot k
};

struct Check {
    std::string name;
    double residual = 0.0;
    double tol = 0.0;
    bool pass() const { return residual <= tol; }
};

FrobeniusModel qh_projective_space(int n, cplx q);

std::vector<Check> model_checks(const FrobeniusModel& m);
// throws Error with the failing axiom as kind
void validate_model(const FrobeniusModel& m);

FrobeniusModel load_model(const std::string& path);
FrobeniusModel model_from_text(const std::string& text);
std::string model_to_text(const FrobeniusModel& m);
void save_model(const FrobeniusModel& m, const std::string& path);

SemisimpleData canonical_data(const FrobeniusModel& m);
SemisimpleData reorder(const SemisimpleData& s, const std::vector<int>& perm);

// S_0..S_K of the calibration at the base point
std::vector<Mat> calibration_series(const FrobeniusModel& m, int K);
// R_0..R_K, with Psi R(z) e^{U/z} the formal solution at z = 0
std::vector<Mat> rmatrix_series(const FrobeniusModel& m, const SemisimpleData& s, int K);

// z d/dz Y - (theta - E/z) Y for Y = S(z) z^theta z^-rho, S truncated at the given order
double qde_residual(const FrobeniusModel& m, const std::vector<Mat>& S, cplx z);
double symplectic_residual(const FrobeniusModel& m, const std::vector<Mat>& S, int k);
// same equation for Psi R(z) e^{U/z} with the exponential stripped
double asymptotic_residual(const FrobeniusModel& m, const SemisimpleData& s, const std::vector<Mat>& R, cplx z);

// g-adjoint: A^* with g(A a, b) = g(a, A^* b)
Mat adjoint(const FrobeniusModel& m, const Mat& a);

}  // namespace fmon
