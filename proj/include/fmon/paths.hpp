#pragma once

#include "fmon/types.hpp"

#include <string>

namespace fmon {

// unit direction with a continuously chosen log, log i = pi i / 2 by default
struct Direction {
    cplx eta = I1;
    cplx log_eta = cplx(0.0, pi / 2);

    static Direction from_angle(double a) { return {std::exp(I1 * a), cplx(0.0, a)}; }
    double angle() const { return log_eta.imag(); }
};

// the 2 mu directions +-(u_i - u_j)/|u_i - u_j| with angles in (-pi/2, 3pi/2], clockwise
std::vector<Direction> critical_directions(const Vec& u);

// slot k -> index into u, sorted by Re(u i / eta)
std::vector<int> lexicographic_order(const Vec& u, const Direction& eta);

struct PathPlan {
    std::vector<cplx> waypoints;
    int target = -1;
    LogBranchPoint end_log;  // endpoint with the chosen value of log(lambda - u_target)
    double lambda0 = 0.0;
};

struct DistinguishedSystem {
    std::vector<PathPlan> paths;  // by slot
    std::vector<int> targets;     // slot -> u index
    Direction eta;
    double lambda0 = 0.0;
};

double min_gap(const Vec& u);
double max_spread(const Vec& u);

DistinguishedSystem reference_system(const Vec& u, const Direction& eta, double lambda0);

// empty when the system is distinguished; otherwise one line per problem
std::vector<std::string> system_defects(const DistinguishedSystem& sys, const Vec& u);

enum class Side { L, R };
// slots i and i+1, 0-based
DistinguishedSystem braid_move(const DistinguishedSystem& sys, const Vec& u, int i, Side side);

// indices on common rays parallel to eta, each sorted far point first
std::vector<std::vector<int>> eta_sequences(const Vec& u, const Direction& eta);

// counter-clockwise (turns > 0) circle through the end of p around its target
std::vector<cplx> end_circle(const PathPlan& p, const Vec& u, int turns = 1, int pieces = 72);

}  // namespace fmon
