#pragma once

#include "cmx/channel.hpp"
#include "cmx/exponents.hpp"
#include "cmx/prob.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cmx {

struct GridSpec {
    int p_y_points = 21;
    int conditional_points = 21;
    int rho_points = 33;
    int s_points = 33;
    int refinement_rounds = 3;
};

enum class XiMode { LowerBound, Exact, BscClosedForm };

struct XiProblem {
    ChannelFamily family = ChannelFamily::singleton(bsc(0.1));
    double rate = 0.0; // nats/symbol
    DeltaStarSpec delta;
    XiMode mode = XiMode::LowerBound;
    GridSpec grids;
    double denom_floor = 1e-6;
    int threads = 0; // 0 = hardware default
};

struct XiWitness {
    int theta_index = -1;
    int theta_prime_index = -1;
    std::optional<Vec> p_y;
    std::optional<Mat> cond_x;  // P_{X|Y} columns
    std::optional<Mat> cond_xp; // P_{X'|Y} columns
    double rho = 0.0;
    double s_or_lambda = 0.0;
    int branch = 1; // branch of the two-term maximization that won
};

struct XiDiagnostics {
    std::vector<int> skipped_theta_indices; // E_r^* below the floor at this rate
    std::vector<double> er_star_values;
    GridSpec grids;
    std::string mode;
};

struct XiResult {
    double xi = 0.0;
    XiWitness witness;
    XiDiagnostics diagnostics;
};

// min over (theta, theta') of max over (rho, lambda) of the all-BSC ratio
//   [rho ln2 - V(theta, 1-lambda rho) - rho V(theta', lambda) - rho R] /
//   [(1-lambda rho) E_r^*(theta) + lambda rho E_r^*(theta')]
XiResult xi_lb_bsc_closed_form(const ChannelFamily& family, double rate,
                               int grid_points = 400, int refinement_rounds = 3,
                               double denom_floor = 1e-6, int threads = 0);

XiResult xi_lower_bound(const XiProblem& p);
XiResult xi_exact(const XiProblem& p);

XiResult solve_xi(const XiProblem& p);

// Replays the stored witness through the same objective; used to check that
// the reported xi is reproducible from the witness record.
double replay_witness(const XiProblem& p, const XiResult& r);

// Both sides of the numerator decomposition
//   rho ln2 - V(th,1-lr) - rho V(th',l) - rho R
//     = (1-lr) E_r(th, lr/(1-lr)) + lr E_r(th', 1/l - 1),  lr = lambda rho.
std::pair<double, double> decomposition_identity(double theta, double theta_prime,
                                                 double lambda, double rho, double rate);

// alpha xi E_r^*(theta) - min_{P_X|Y} A(theta, alpha, P_XY) with P_Y fixed.
// The finite-block oracle for this rate lives in the simulation module.
double log_moment_rate(const Dmc& w, double alpha, double xi, double rate,
                       const Pmf& p_y, const DeltaStarSpec& spec);

} // namespace cmx
