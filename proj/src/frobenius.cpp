#include "fmon/frobenius.hpp"
#include "fmon/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <fstream>
#include <numeric>
#include <sstream>

namespace fmon {

using nlohmann::json;

std::string FrobeniusModel::descriptor() const {
    std::ostringstream os;
    if (projective_n > 0)
        os << "QH(P^" << projective_n << "), q = " << novikov.real() << (novikov.imag() < 0 ? "" : "+")
           << novikov.imag() << "i";
    else
        os << "model file, N = " << dim;
    return os.str();
}

FrobeniusModel qh_projective_space(int n, cplx q) {
    if (n < 1 || n > 8) throw Error("range", "P^n supported for 1 <= n <= 8");
    if (q == 0.0) throw Error("range", "q must be non-zero");
    const int N = n + 1;
    FrobeniusModel m;
    m.dim = N;
    m.conformal_dim = double(n);
    m.novikov = q;
    m.projective_n = n;
    m.pairing = Mat::Zero(N, N);
    m.theta = Mat::Zero(N, N);
    m.rho = Mat::Zero(N, N);
    Mat ap = Mat::Zero(N, N);
    for (int i = 0; i < N; ++i) {
        m.pairing(i, n - i) = 1.0;
        m.theta(i, i) = 0.5 * n - i;
    }
    for (int k = 0; k < n; ++k) {
        m.rho(k + 1, k) = double(N);
        ap(k + 1, k) = 1.0;
    }
    ap(0, n) = q;
    m.mult.push_back(Mat::Identity(N, N));
    for (int i = 1; i < N; ++i) m.mult.push_back(m.mult.back() * ap);
    m.euler_mult = double(N) * ap;
    m.base_point = Vec::Zero(N);
    m.calibration = calibration_series(m, 8);
    return m;
}

Mat adjoint(const FrobeniusModel& m, const Mat& a) {
    return m.pairing.partialPivLu().solve(a.transpose() * m.pairing);
}

std::vector<Check> model_checks(const FrobeniusModel& m) {
    std::vector<Check> out;
    const int N = m.dim;
    const double tol = 1e-12;
    auto add = [&](std::string name, double r, double t = 1e-12) { out.push_back({std::move(name), r, t}); };

    add("F1 pairing symmetric", max_abs(m.pairing - m.pairing.transpose()), tol);
    Eigen::FullPivLU<Mat> lu(m.pairing);
    add("F1 pairing nondegenerate", lu.isInvertible() ? 0.0 : 1.0, 0.0);

    double frob = 0, comm = 0, assoc = 0;
    for (int i = 0; i < N; ++i) {
        frob = std::max(frob, max_abs(m.mult[i].transpose() * m.pairing - m.pairing * m.mult[i]));
        for (int j = 0; j < N; ++j) {
            comm = std::max(comm, max_abs(m.mult[i] * m.mult[j] - m.mult[j] * m.mult[i]));
            // phi_i * phi_j = sum_k c_ij^k phi_k, so A_i A_j = sum_k c_ij^k A_k
            Mat lin = Mat::Zero(N, N);
            for (int k = 0; k < N; ++k) lin += m.mult[i](k, j) * m.mult[k];
            assoc = std::max(assoc, max_abs(m.mult[i] * m.mult[j] - lin));
        }
    }
    add("F3 unit", max_abs(m.mult[0] - Mat::Identity(N, N)), tol);
    add("F2 Frobenius property", frob, tol * (1 + max_abs(m.pairing)));
    add("commutativity", comm, 1e-10);
    add("associativity", assoc, 1e-10);

    double e = 0;
    for (int i = 0; i < N; ++i) e = std::max(e, max_abs(m.euler_mult * m.mult[i] - m.mult[i] * m.euler_mult));
    add("Euler multiplication commutes", e, 1e-10);
    add("Euler multiplication self-adjoint", max_abs(m.euler_mult.transpose() * m.pairing - m.pairing * m.euler_mult),
        1e-10);

    add("grading [theta,rho] = -rho", max_abs(m.theta * m.rho - m.rho * m.theta + m.rho), tol);
    add("theta skew for the pairing", max_abs(m.pairing * m.theta + m.theta.transpose() * m.pairing), tol);
    Mat r = Mat::Identity(N, N);
    for (int k = 0; k < N; ++k) r = r * m.rho;
    add("rho nilpotent", max_abs(r), tol);
    if (!m.calibration.empty()) add("calibration S_0 = 1", max_abs(m.calibration[0] - Mat::Identity(N, N)), tol);
    return out;
}

void validate_model(const FrobeniusModel& m) {
    for (const auto& c : model_checks(m)) {
        if (c.pass()) continue;
        std::string kind = c.name.substr(0, 2) == "F1" ? "F1" : c.name.substr(0, 2) == "F2" ? "F2"
                                                            : c.name.substr(0, 2) == "F3" ? "F3"
                                                                                          : "invariant";
        std::ostringstream os;
        os << c.name << " violated, residual " << c.residual;
        throw Error(kind, os.str());
    }
}

// ---- model file ----

namespace {

cplx num(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw Error("schema", "numbers are encoded as [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json num(cplx z) { return json::array({z.real(), z.imag()}); }

Mat matrix(const json& j, int N, const char* field) {
    if (!j.is_array() || int(j.size()) != N) throw Error("schema", std::string(field) + " must be N x N");
    Mat a(N, N);
    for (int r = 0; r < N; ++r) {
        if (!j[r].is_array() || int(j[r].size()) != N) throw Error("schema", std::string(field) + " must be N x N");
        for (int c = 0; c < N; ++c) a(r, c) = num(j[r][c]);
    }
    return a;
}

json matrix(const Mat& a) {
    json rows = json::array();
    for (int r = 0; r < a.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < a.cols(); ++c) row.push_back(num(a(r, c)));
        rows.push_back(row);
    }
    return rows;
}

const json& field(const json& j, const char* name) {
    if (!j.contains(name)) throw Error("schema", std::string("missing field ") + name);
    return j.at(name);
}

}  // namespace

FrobeniusModel model_from_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error("schema", e.what());
    }
    FrobeniusModel m;
    const json& d = field(j, "dim");
    if (!d.is_number_integer() || d.get<int>() < 1) throw Error("schema", "dim must be a positive integer");
    const int N = d.get<int>();
    m.dim = N;
    m.conformal_dim = num(field(j, "conformal_dim"));
    m.pairing = matrix(field(j, "pairing"), N, "pairing");
    if (max_abs(m.pairing - m.pairing.transpose()) > 1e-12)
        throw Error("F1", "pairing is not symmetric");
    const json& th = field(j, "theta_eigenvalues");
    if (!th.is_array() || int(th.size()) != N) throw Error("schema", "theta_eigenvalues must have N entries");
    m.theta = Mat::Zero(N, N);
    for (int k = 0; k < N; ++k) m.theta(k, k) = num(th[k]);
    m.rho = matrix(field(j, "rho"), N, "rho");
    const json& c = field(j, "structure_constants");
    if (!c.is_array() || int(c.size()) != N) throw Error("schema", "structure_constants must be N x N x N");
    for (int i = 0; i < N; ++i) {
        if (!c[i].is_array() || int(c[i].size()) != N) throw Error("schema", "structure_constants must be N x N x N");
        Mat a(N, N);
        for (int jj = 0; jj < N; ++jj) {
            const json& v = c[i][jj];
            if (!v.is_array() || int(v.size()) != N) throw Error("schema", "structure_constants must be N x N x N");
            for (int k = 0; k < N; ++k) a(k, jj) = num(v[k]);
        }
        m.mult.push_back(a);
    }
    m.euler_mult = matrix(field(j, "euler_multiplication"), N, "euler_multiplication");
    const json& cal = field(j, "calibration");
    if (!cal.is_array() || cal.empty()) throw Error("schema", "calibration must list S_0, S_1, ...");
    for (const auto& s : cal) m.calibration.push_back(matrix(s, N, "calibration"));
    const json& bp = field(j, "base_point");
    if (!bp.is_array() || int(bp.size()) != N) throw Error("schema", "base_point must have N entries");
    m.base_point = Vec(N);
    for (int k = 0; k < N; ++k) m.base_point(k) = num(bp[k]);
    if (j.contains("descriptor")) {
        const json& ds = j["descriptor"];
        if (ds.value("kind", "") == "projective_space") {
            m.projective_n = ds.at("n").get<int>();
            m.novikov = num(ds.at("q"));
            if (m.projective_n + 1 != N) throw Error("schema", "descriptor n does not match dim");
        }
    }
    validate_model(m);
    return m;
}

std::string model_to_text(const FrobeniusModel& m) {
    json j;
    j["dim"] = m.dim;
    j["conformal_dim"] = num(m.conformal_dim);
    j["pairing"] = matrix(m.pairing);
    json th = json::array();
    for (int k = 0; k < m.dim; ++k) th.push_back(num(m.theta(k, k)));
    j["theta_eigenvalues"] = th;
    j["rho"] = matrix(m.rho);
    json c = json::array();
    for (int i = 0; i < m.dim; ++i) {
        json row = json::array();
        for (int jj = 0; jj < m.dim; ++jj) {
            json v = json::array();
            for (int k = 0; k < m.dim; ++k) v.push_back(num(m.mult[i](k, jj)));
            row.push_back(v);
        }
        c.push_back(row);
    }
    j["structure_constants"] = c;
    j["euler_multiplication"] = matrix(m.euler_mult);
    json cal = json::array();
    for (const auto& s : m.calibration) cal.push_back(matrix(s));
    j["calibration"] = cal;
    json bp = json::array();
    for (int k = 0; k < m.dim; ++k) bp.push_back(num(m.base_point(k)));
    j["base_point"] = bp;
    if (m.projective_n > 0) j["descriptor"] = {{"kind", "projective_space"}, {"n", m.projective_n}, {"q", num(m.novikov)}};
    return j.dump(1);
}

FrobeniusModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_text(ss.str());
}

void save_model(const FrobeniusModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("io", "cannot write " + path);
    out << model_to_text(m) << "\n";
}

// ---- canonical coordinates ----

SemisimpleData canonical_data(const FrobeniusModel& m) {
    const int N = m.dim;
    Eigen::ComplexEigenSolver<Mat> es(m.euler_mult);
    Vec u = es.eigenvalues();
    Mat v = es.eigenvectors();
    double scale = u.cwiseAbs().maxCoeff();
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            if (std::abs(u(i) - u(j)) <= 1e-8 * std::max(scale, 1e-300))
                throw Error("caustic", "Euler multiplication has colliding eigenvalues");

    SemisimpleData s;
    s.u = u;
    s.delta = Vec(N);
    s.psi = Mat(N, N);
    for (int i = 0; i < N; ++i) {
        Vec c = v.col(i);
        cplx n2 = (c.transpose() * m.pairing * c)(0, 0);
        if (std::abs(n2) < 1e-14) throw Error("caustic", "isotropic eigenvector");
        c /= std::sqrt(n2);
        Eigen::Index k;
        c.cwiseAbs().maxCoeff(&k);
        double a = std::arg(c(k));
        if (!(a > -pi / 2 && a <= pi / 2)) c = -c;
        s.psi.col(i) = c;
        // idempotent e = c / t with e * e = e
        Vec cc = Vec::Zero(N);
        for (int j = 0; j < N; ++j) cc += c(j) * (m.mult[j] * c);
        cplx t = cc(k) / c(k);
        Vec e = c / t;
        s.delta(i) = 1.0 / (e.transpose() * m.pairing * e)(0, 0);
    }
    // default slot order: lexicographic for eta = i
    std::vector<int> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](int a, int b) {
        if (u(a).real() != u(b).real()) return u(a).real() < u(b).real();
        return u(a).imag() < u(b).imag();
    });
    s.order.resize(N);
    std::iota(s.order.begin(), s.order.end(), 0);
    return reorder(s, perm);
}

SemisimpleData reorder(const SemisimpleData& s, const std::vector<int>& perm) {
    const int N = int(perm.size());
    SemisimpleData r;
    r.u = Vec(N);
    r.delta = Vec(N);
    r.psi = Mat(s.psi.rows(), N);
    r.order.resize(N);
    for (int k = 0; k < N; ++k) {
        r.u(k) = s.u(perm[k]);
        r.delta(k) = s.delta(perm[k]);
        r.psi.col(k) = s.psi.col(perm[k]);
        r.order[k] = s.order[perm[k]];
    }
    return r;
}

// ---- calibration ----

namespace {

// element of C[p]/p^N [[w]]: a(i, j) is the coefficient of w^i p^j
using Ring = Mat;

Ring rmul(const Ring& a, const Ring& b) {
    const int W = int(a.rows()), N = int(a.cols());
    Ring c = Ring::Zero(W, N);
    for (int i = 0; i < W; ++i)
        for (int j = 0; j < N; ++j) {
            if (a(i, j) == 0.0) continue;
            c.bottomRightCorner(W - i, N - j) += a(i, j) * b.topLeftCorner(W - i, N - j);
        }
    return c;
}

// S from the closed-form J-function of P^n; w = 1/z
std::vector<Mat> projective_calibration(const FrobeniusModel& m, int K) {
    const int n = m.projective_n, N = n + 1, W = K + 1;
    const cplx q = m.novikov;
    std::vector<Mat> S(K + 1, Mat::Zero(N, N));
    for (int row = 0; row < N; ++row) {
        Ring tot = Ring::Zero(W, N);
        tot(0, n - row) = 1.0;
        for (int d = 1;; ++d) {
            // q^d w^{(n+1)d-(n-row)} (d + p w)^{n-row} / prod_k (k + p w)^{n+1}
            int sh = N * d - (n - row);
            if (sh >= W) break;
            Ring t = Ring::Zero(W, N);
            t(0, 0) = std::pow(q, d);
            Ring base = Ring::Zero(W, N);
            base(0, 0) = double(d);
            if (W > 1 && N > 1) base(1, 1) = 1.0;
            for (int e = 0; e < n - row; ++e) t = rmul(t, base);
            for (int k = 1; k <= d; ++k) {
                Ring inv = Ring::Zero(W, N);
                for (int j = 0; j < std::min(W, N); ++j) inv(j, j) = (j % 2 ? -1.0 : 1.0) / std::pow(double(k), j + 1);
                for (int e = 0; e < N; ++e) t = rmul(t, inv);
            }
            tot.bottomRows(W - sh) += t.topRows(W - sh);
        }
        for (int b = 0; b < N; ++b)
            for (int k = 0; k <= K; ++k) S[k](row, b) = tot(k, n - b);
    }
    return S;
}

}  // namespace

std::vector<Mat> calibration_series(const FrobeniusModel& m, int K) {
    if (m.projective_n > 0) return projective_calibration(m, K);
    const int N = m.dim;
    std::vector<Mat> S;
    for (int k = 0; k <= K && k < int(m.calibration.size()); ++k) S.push_back(m.calibration[k]);
    if (S.empty()) S.push_back(Mat::Identity(N, N));
    // (ad_theta + k) S_k = E S_{k-1} - S_{k-1} rho, entrywise in the theta eigenbasis
    for (int k = int(S.size()); k <= K; ++k) {
        Mat rhs = m.euler_mult * S[k - 1] - S[k - 1] * m.rho;
        Mat sk(N, N);
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) {
                cplx d = m.theta(a, a) - m.theta(b, b) + double(k);
                if (std::abs(d) < 1e-12)
                    throw Error("recursion-breakdown",
                                "resonant entry at order " + std::to_string(k) + "; supply S_k in the model file");
                sk(a, b) = rhs(a, b) / d;
            }
        S.push_back(sk);
    }
    return S;
}

double qde_residual(const FrobeniusModel& m, const std::vector<Mat>& S, cplx z) {
    const int N = m.dim;
    Mat sz = Mat::Zero(N, N), dsz = Mat::Zero(N, N);
    for (std::size_t k = 0; k < S.size(); ++k) {
        cplx zk = std::pow(z, -double(k));
        sz += S[k] * zk;
        dsz -= double(k) * S[k] * zk;
    }
    LogBranchPoint lz = principal(z);
    Mat P = operator_power(lz, m.theta, m.rho);
    Mat Y = sz * P;
    // z d/dz (z^theta z^-rho) = theta z^theta z^-rho - z^{-1} rho z^theta z^-rho
    Mat dY = dsz * P + sz * (m.theta * P - m.rho * P / z);
    Mat res = dY - (m.theta - m.euler_mult / z) * Y;
    return max_abs(res) / std::max(1.0, max_abs(Y));
}

double symplectic_residual(const FrobeniusModel& m, const std::vector<Mat>& S, int k) {
    Mat acc = Mat::Zero(m.dim, m.dim);
    for (int a = 0; a <= k; ++a) acc += (a % 2 ? -1.0 : 1.0) * adjoint(m, S[a]) * S[k - a];
    return max_abs(acc);
}

std::vector<Mat> rmatrix_series(const FrobeniusModel& m, const SemisimpleData& s, int K) {
    const int N = m.dim;
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            if (std::abs(s.u(i) - s.u(j)) < 1e-12) throw Error("caustic", "u_i collision");
    Mat Th = s.psi.partialPivLu().solve(m.theta * s.psi);
    std::vector<Mat> R(1, Mat::Identity(N, N));
    for (int k = 0; k < K; ++k) {
        Mat T = (Th - double(k) * Mat::Identity(N, N)) * R[k];
        Mat next = Mat::Zero(N, N);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                if (i != j) next(i, j) = T(i, j) / (s.u(i) - s.u(j));
        // diagonal from the next order of the z-equation
        for (int i = 0; i < N; ++i) {
            cplx acc = 0.0;
            for (int j = 0; j < N; ++j)
                if (j != i) acc += Th(i, j) * next(j, i);
            next(i, i) = acc / (double(k + 1) - Th(i, i));
        }
        R.push_back(next);
    }
    return R;
}

double asymptotic_residual(const FrobeniusModel& m, const SemisimpleData& s, const std::vector<Mat>& R, cplx z) {
    const int N = m.dim;
    Mat rz = Mat::Zero(N, N), zdr = Mat::Zero(N, N);
    for (std::size_t k = 0; k < R.size(); ++k) {
        cplx zk = std::pow(z, double(k));
        rz += R[k] * zk;
        zdr += double(k) * R[k] * zk;
    }
    Mat U = s.u.asDiagonal();
    Mat lhs = s.psi * (zdr - rz * U / z);
    Mat rhs = (m.theta - m.euler_mult / z) * s.psi * rz;
    return max_abs(lhs - rhs);
}

}  // namespace fmon
