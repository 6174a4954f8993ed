#pragma once

#include "cmx/channel.hpp"
#include "cmx/prob.hpp"

#include <optional>

namespace cmx {

// --- BSC closed forms -------------------------------------------------

// V(theta, alpha) = ln[(1-theta)^alpha + theta^alpha]
double bsc_V(double theta, double alpha);

// E_r(theta, rho) = rho ln2 - (1+rho) V(theta, 1/(1+rho)) - rho R
double bsc_Er(double theta, double rho, double rate);

struct ErCurve {
    double theta = 0.0;
    double rate = 0.0;
    double value = 0.0;   // E_r^*(theta) at this rate, nats/symbol
    double rho_hat = 0.0; // maximizer in [0,1]
};

// max over rho in [0,1] of bsc_Er, by golden section (concave objective).
ErCurve bsc_Er_star(double theta, double rate);

// --- Gallager functions for general DMCs ------------------------------

// E_0(rho, q) = -ln sum_y [ sum_x q(x) P(y|x)^{1/(1+rho)} ]^{1+rho}
double gallager_e0(const Dmc& w, const Pmf& q, double rho);

// max over rho in [0,1] of E_0(rho, q) - rho R.
ErCurve er_star(const Dmc& w, const Pmf& q, double rate);

// --- Random-coding-distribution rate functionals ----------------------

// Limit functional Delta*(P) of a coding-distribution sequence.
struct DeltaStarSpec {
    enum class Kind { UniformAlphabet, IidRef, TypeNeighborhood, LinearBinary };

    Kind kind = Kind::UniformAlphabet;
    std::optional<Pmf> ref;      // IidRef: q
    std::optional<Pmf> center;   // TypeNeighborhood: p0
    double radius = 0.0;         // TypeNeighborhood: total-variation radius

    static DeltaStarSpec uniform_alphabet();
    static DeltaStarSpec iid_ref(Pmf q);
    static DeltaStarSpec type_neighborhood(Pmf p0, double radius);
    static DeltaStarSpec linear_binary();

    bool iid_like() const { return kind == Kind::UniformAlphabet || kind == Kind::IidRef || kind == Kind::LinearBinary; }
    // The single-letter distribution implied by the spec (for iid-like kinds
    // the reference itself; for TypeNeighborhood the center).
    Pmf implied_q(Eigen::Index alphabet) const;
};

double delta_star(const DeltaStarSpec& spec, const Pmf& p);

// A(theta, alpha, P_XY) = I(X;Y) + Delta*(P_X) - alpha E ln P_theta(Y|X)
double A_func(const Dmc& w, double alpha, const JointPmf& j, const DeltaStarSpec& spec);

// Closed-form min over P_{X|Y} of A for iid-like specs:
//   -sum_b p_y(b) ln sum_a q(a) w(b|a)^alpha
// (Gibbs variational principle applied per output letter.)
double min_A_over_conditional(const Dmc& w, double alpha, const Pmf& p_y, const DeltaStarSpec& spec);

// Grid fallback for specs without the closed form. Minimizes A over all
// conditional columns jointly (Delta* couples them through the X-marginal).
double min_A_grid(const Dmc& w, double alpha, const Pmf& p_y, const DeltaStarSpec& spec,
                  int points_per_dof = 41, int refinement_rounds = 3);

// B(theta, theta', P_Y, P_X|Y, P_X'|Y, s, rho)
//   = A(theta, 1 - s rho, P_XY) + rho A(theta', s, P_X'Y) - H(Y)
double B_func(const Dmc& w_theta, const Dmc& w_theta_prime, const Pmf& p_y,
              const Mat& cond_x_given_y, const Mat& cond_xp_given_y,
              double s, double rho, const DeltaStarSpec& spec);

// --- Convolutional-ensemble bounds ------------------------------------

// R_{theta,0} = -ln sum_y [ sum_v (1/2) sqrt(P(y|v)) ]^2, binary input.
double conv_cutoff_R0(const Dmc& w);

// E_{theta,0}(rho) with the fair-coin input distribution.
double conv_E0(const Dmc& w, double rho);

// Averaged path-error bound (2^b - 1) 2^{b l rho} e^{-(K+l) n E_{theta,0}(rho)}.
double conv_path_bound(int b, int K, int l, int n, const Dmc& w, double rho);

} // namespace cmx
