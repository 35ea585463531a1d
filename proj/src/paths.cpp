#include "fmon/paths.hpp"

#include "fmon/numerics.hpp"

#include <algorithm>
#include <numeric>

namespace fmon {

namespace {

double wrap_window(double a) {
    // into (-pi/2, 3pi/2]
    while (a <= -pi / 2) a += 2 * pi;
    while (a > 3 * pi / 2) a -= 2 * pi;
    return a;
}

void check_distinct(const Vec& u) {
    if (u.size() < 1) throw Error("empty", "no canonical coordinates");
    if (u.size() > 1 && min_gap(u) <= 1e-8 * max_spread(u))
        throw Error("coincident-u", "canonical coordinates collide");
}

// do segments ab and cd meet away from the point x (a shared end point is allowed)
bool segments_meet(cplx a, cplx b, cplx c, cplx d, cplx x, double tol) {
    auto cross = [](cplx p, cplx q) { return p.real() * q.imag() - p.imag() * q.real(); };
    auto away = [&](cplx p) { return std::abs(p - x) > tol; };
    // end points lying on the other segment
    if ((away(a) && segment_distance(c, d, a) < tol) || (away(b) && segment_distance(c, d, b) < tol) ||
        (away(c) && segment_distance(a, b, c) < tol) || (away(d) && segment_distance(a, b, d) < tol))
        return true;
    double den = cross(b - a, d - c);
    if (std::abs(den) < 1e-300) return false;
    double t = cross(c - a, d - c) / den, s = cross(c - a, b - a) / den;
    if (t < 0 || t > 1 || s < 0 || s > 1) return false;
    return away(a + t * (b - a));
}

void append(std::vector<cplx>& to, const std::vector<cplx>& pts) {
    for (cplx p : pts)
        if (to.empty() || std::abs(p - to.back()) > 1e-14 * (1 + std::abs(p))) to.push_back(p);
}

}  // namespace

double min_gap(const Vec& u) {
    double g = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < u.size(); ++i)
        for (Eigen::Index j = i + 1; j < u.size(); ++j) g = std::min(g, std::abs(u(i) - u(j)));
    return g;
}

double max_spread(const Vec& u) {
    double g = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i)
        for (Eigen::Index j = i + 1; j < u.size(); ++j) g = std::max(g, std::abs(u(i) - u(j)));
    return g;
}

std::vector<Direction> critical_directions(const Vec& u) {
    check_distinct(u);
    std::vector<double> ang;
    for (Eigen::Index i = 0; i < u.size(); ++i)
        for (Eigen::Index j = 0; j < u.size(); ++j)
            if (i != j) ang.push_back(wrap_window(std::arg(u(i) - u(j))));
    std::sort(ang.begin(), ang.end(), std::greater<>());
    std::vector<Direction> out;
    for (double a : ang)
        if (out.empty() || std::abs(out.back().angle() - a) > 1e-12) out.push_back(Direction::from_angle(a));
    // the window end points are the same direction
    if (out.size() > 1 && std::abs(out.front().angle() - out.back().angle() - 2 * pi) < 1e-12) out.pop_back();
    return out;
}

std::vector<int> lexicographic_order(const Vec& u, const Direction& eta) {
    check_distinct(u);
    const int n = int(u.size());
    std::vector<double> key(n);
    for (int k = 0; k < n; ++k) key[k] = (u(k) * I1 / eta.eta).real();
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](int a, int b) { return key[a] < key[b]; });
    double scale = max_spread(u);
    for (int k = 0; k + 1 < n; ++k)
        if (key[perm[k + 1]] - key[perm[k]] <= 1e-10 * scale)
            throw Error("critical-direction", "eta is parallel to some u_i - u_j");
    return perm;
}

DistinguishedSystem reference_system(const Vec& u, const Direction& eta, double lambda0) {
    const int n = int(u.size());
    double umax = u.cwiseAbs().maxCoeff();
    if (!(lambda0 > 1.1 * umax)) throw Error("lambda0", "reference value must exceed 1.1 max|u|");
    std::vector<int> order = lexicographic_order(u, eta);
    const double r_end = n > 1 ? 0.1 * min_gap(u) : 0.1 * std::max(1.0, umax);

    // where the ray u_i + s eta meets |lambda| = r, and the total turn from lambda0 to it
    auto hit = [&](int i, double r) {
        double b = (u(i) * std::conj(eta.eta)).real();
        double s = -b + std::sqrt(b * b - std::norm(u(i)) + r * r);
        return u(i) + s * eta.eta;
    };
    auto turn = [&](int i, double r) {
        cplx p = hit(i, r);
        return eta.angle() - pi / 2 + std::arg(p / (-I1 * eta.eta));
    };

    std::vector<double> a0(n);
    for (int k = 0; k < n; ++k) a0[k] = turn(order[k], lambda0);
    // nested radii: bigger turn, bigger radius; the two turning senses separately
    std::vector<int> rank(n, 0);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            if (j != k && (a0[j] >= 0) == (a0[k] >= 0) &&
                (std::abs(a0[j]) < std::abs(a0[k]) || (std::abs(a0[j]) == std::abs(a0[k]) && j < k)))
                ++rank[k];

    DistinguishedSystem sys;
    sys.eta = eta;
    sys.lambda0 = lambda0;
    sys.targets = order;
    for (int k = 0; k < n; ++k) {
        const int i = order[k];
        double r = lambda0 * (1.0 + 0.02 * rank[k]);
        double a = turn(i, r);
        double eps = (a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0)) * std::min(2.0 * pi / 180, std::abs(a) / 4);
        PathPlan p;
        p.lambda0 = lambda0;
        p.target = i;
        p.waypoints.push_back(lambda0);
        append(p.waypoints, arc_points(0.0, r, eps, a));
        cplx end = u(i) + r_end * eta.eta;
        append(p.waypoints, {end});
        p.end_log = {end, std::log(r_end) + eta.log_eta};
        sys.paths.push_back(std::move(p));
    }
    return sys;
}

std::vector<std::string> system_defects(const DistinguishedSystem& sys, const Vec& u) {
    std::vector<std::string> out;
    const int n = int(sys.paths.size());
    const double clearance = 1e-3 * std::max(max_spread(u), 1e-300);
    const double tol = 1e-9 * sys.lambda0;
    std::vector<double> exits;
    for (int k = 0; k < n; ++k) {
        const auto& w = sys.paths[k].waypoints;
        if (w.size() < 2 || std::abs(w.front() - sys.lambda0) > tol) {
            out.push_back("path " + std::to_string(k) + " does not start at lambda0");
            continue;
        }
        for (std::size_t s = 0; s + 1 < w.size(); ++s)
            for (Eigen::Index j = 0; j < u.size(); ++j) {
                if (j == sys.paths[k].target && s + 2 == w.size()) continue;
                if (segment_distance(w[s], w[s + 1], u(j)) < clearance)
                    out.push_back("path " + std::to_string(k) + " passes too close to u" + std::to_string(j));
            }
        exits.push_back(std::arg(w[1] - w[0]));
    }
    for (int k = 0; k < n; ++k)
        for (int j = k + 1; j < n; ++j) {
            const auto& a = sys.paths[k].waypoints;
            const auto& b = sys.paths[j].waypoints;
            bool hit = false;
            for (std::size_t s = 0; s + 1 < a.size() && !hit; ++s)
                for (std::size_t t = 0; t + 1 < b.size() && !hit; ++t)
                    hit = segments_meet(a[s], a[s + 1], b[t], b[t + 1], sys.lambda0, tol);
            if (hit) out.push_back("paths " + std::to_string(k) + " and " + std::to_string(j) + " intersect");
        }
    if (int(exits.size()) == n && n > 1) {
        // anticlockwise exits: the cyclic turns add up to one full turn
        double total = 0.0;
        for (int k = 0; k < n; ++k) {
            double d = std::fmod(exits[(k + 1) % n] - exits[k] + 4 * pi, 2 * pi);
            if (d < 1e-12) d += 2 * pi;
            total += d;
        }
        if (std::abs(total - 2 * pi) > 1e-9) out.push_back("exit order at lambda0 is not anticlockwise");
    }
    return out;
}

std::vector<cplx> end_circle(const PathPlan& p, const Vec& u, int turns, int pieces) {
    cplx c = u(p.target);
    cplx e = p.waypoints.back();
    double r = std::abs(e - c), a = std::arg(e - c);
    int k = pieces * std::abs(turns);
    std::vector<cplx> out;
    for (int s = 0; s <= k; ++s) out.push_back(c + r * std::exp(I1 * (a + 2 * pi * turns * double(s) / k)));
    out.back() = e;
    return out;
}

DistinguishedSystem braid_move(const DistinguishedSystem& sys, const Vec& u, int i, Side side) {
    const int n = int(sys.paths.size());
    if (i < 0 || i + 1 >= n) throw Error("index", "braid index out of range");
    DistinguishedSystem out = sys;
    const PathPlan& a = sys.paths[i];
    const PathPlan& b = sys.paths[i + 1];
    auto detour = [&](const PathPlan& around, int turns, const PathPlan& then) {
        PathPlan p = then;
        p.waypoints.clear();
        append(p.waypoints, around.waypoints);
        append(p.waypoints, end_circle(around, u, turns));
        std::vector<cplx> back(around.waypoints.rbegin(), around.waypoints.rend());
        append(p.waypoints, back);
        append(p.waypoints, then.waypoints);
        return p;
    };
    if (side == Side::L) {
        out.paths[i] = detour(a, 1, b);
        out.paths[i + 1] = a;
    } else {
        out.paths[i] = b;
        out.paths[i + 1] = detour(b, -1, a);
    }
    std::swap(out.targets[i], out.targets[i + 1]);
    return out;
}

std::vector<std::vector<int>> eta_sequences(const Vec& u, const Direction& eta) {
    check_distinct(u);
    const int n = int(u.size());
    const double tol = 1e-10 * max_spread(u);
    std::vector<std::vector<int>> groups;
    std::vector<bool> used(n, false);
    bool any = false;
    for (int k = 0; k < n; ++k) {
        if (used[k]) continue;
        std::vector<int> g;
        for (int j = k; j < n; ++j)
            if (!used[j] && std::abs(((u(j) - u(k)) / eta.eta).imag()) <= tol) {
                g.push_back(j);
                used[j] = true;
            }
        std::sort(g.begin(), g.end(), [&](int x, int y) { return (u(x) / eta.eta).real() > (u(y) / eta.eta).real(); });
        if (g.size() > 1) any = true;
        groups.push_back(g);
    }
    if (!any) throw Error("not-critical", "eta is not a critical direction");
    return groups;
}

}  // namespace fmon
