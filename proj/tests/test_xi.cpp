#include "cmx/xi.hpp"

#include "cmx/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace cmx;

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

TEST_CASE("decomposition identity") {
    SUBCASE("theta = theta' = 1/2 collapses to -rho R") {
        for (double rho : {0.2, 0.7}) {
            auto [lhs, rhs] = decomposition_identity(0.5, 0.5, 0.8, rho, 0.3);
            CHECK(lhs == doctest::Approx(-rho * 0.3).epsilon(1e-12));
            CHECK(rhs == doctest::Approx(-rho * 0.3).epsilon(1e-12));
        }
    }
    SUBCASE("randomized tuples") {
        RngStream rng(101);
        for (int t = 0; t < 2000; ++t) {
            const double th = 0.02 + 0.96 * rng.next_double();
            const double tp = 0.02 + 0.96 * rng.next_double();
            const double rho = rng.next_double();
            double lambda = rng.next_double() * 3.0 + 1e-3;
            if (lambda * rho >= 0.99) lambda = 0.99 / std::max(rho, 1e-9);
            auto [lhs, rhs] = decomposition_identity(th, tp, lambda, rho, 0.25 * rng.next_double());
            CHECK(std::abs(lhs - rhs) <= 1e-10);
        }
    }
    SUBCASE("small lambda rho keeps the identity with E_r(.,0) = 0") {
        auto [lhs, rhs] = decomposition_identity(0.1, 0.2, 1e-9, 0.5, 0.1);
        CHECK(std::abs(lhs - rhs) <= 1e-10);
    }
    SUBCASE("domain guard") {
        CHECK_THROWS_AS(decomposition_identity(0.1, 0.2, 2.0, 0.5, 0.1), std::domain_error);
    }
}

TEST_CASE("closed-form lower bound equals one on a BSC grid") {
    ChannelFamily fam = ChannelFamily::bsc_interval(0.05, 0.30, 0.025);
    XiResult r = xi_lb_bsc_closed_form(fam, 0.05, 200, 3);
    CHECK(r.xi >= 0.99);
    CHECK(r.xi <= 1.0 + 1e-6);
    CHECK(r.diagnostics.skipped_theta_indices.empty()); // rate below every capacity

    SUBCASE("witness replay") {
        XiProblem p{fam, 0.05, DeltaStarSpec::linear_binary(), XiMode::BscClosedForm, {}, 1e-6, 0};
        CHECK(replay_witness(p, r) == doctest::Approx(r.xi).epsilon(1e-9));
    }
}

TEST_CASE("closed form skips channels whose exponent vanishes") {
    ChannelFamily fam = ChannelFamily::bsc_interval(0.05, 0.30, 0.0125);
    XiResult r = xi_lb_bsc_closed_form(fam, 0.2, 120, 2);
    CHECK(!r.diagnostics.skipped_theta_indices.empty());
    // every skipped theta has capacity below the rate
    for (int idx : r.diagnostics.skipped_theta_indices) {
        const double th = *fam.grid()[idx].theta;
        CHECK(kLn2 - binary_entropy(th) <= 0.2 + 1e-9);
    }
    CHECK(r.xi >= 0.99);
    CHECK(r.xi <= 1.0 + 1e-6);
}

TEST_CASE("closed form rejects rates beyond the whole family") {
    ChannelFamily fam = ChannelFamily::bsc_interval(0.4, 0.45, 0.025);
    CHECK_THROWS_AS(xi_lb_bsc_closed_form(fam, 0.5, 50, 1), std::runtime_error);
}

TEST_CASE("witness construction from the per-channel achievers gives ratio one") {
    // lambda = 1/(1+rho~), rho = rho^/(1+rho^) (1+rho~)
    const double R = 0.1;
    for (auto [th, tp] : {std::pair{0.05, 0.2}, std::pair{0.1, 0.1}, std::pair{0.25, 0.0625}}) {
        const ErCurve a = bsc_Er_star(th, R), b = bsc_Er_star(tp, R);
        const double lambda = 1.0 / (1.0 + b.rho_hat);
        const double rho = a.rho_hat / (1.0 + a.rho_hat) * (1.0 + b.rho_hat);
        REQUIRE(rho <= 1.0 + 1e-12);
        const double u = lambda * rho;
        const double num = rho * kLn2 - bsc_V(th, 1.0 - u) - rho * bsc_V(tp, lambda) - rho * R;
        const double den = (1.0 - u) * a.value + u * b.value;
        CHECK(num / den == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("lower-bound solver (general path) on a singleton family") {
    XiProblem p;
    p.family = ChannelFamily::singleton(bsc(0.1));
    p.rate = 0.1;
    p.delta = DeltaStarSpec::uniform_alphabet();
    p.mode = XiMode::LowerBound;
    p.grids.p_y_points = 21;
    p.grids.rho_points = 65;
    p.grids.s_points = 65;
    p.grids.refinement_rounds = 3;
    XiResult r = xi_lower_bound(p);
    CHECK(r.xi == doctest::Approx(1.0).epsilon(0.02));
    CHECK(replay_witness(p, r) == doctest::Approx(r.xi).epsilon(1e-9));

    SUBCASE("linear-binary delta coincides on binary alphabets") {
        XiProblem q = p;
        q.delta = DeltaStarSpec::linear_binary();
        XiResult r2 = xi_lower_bound(q);
        CHECK(r2.xi == doctest::Approx(r.xi).epsilon(1e-9));
    }
}

TEST_CASE("lower-bound solver on a small BSC grid") {
    XiProblem p;
    p.family = ChannelFamily::bsc_interval(0.05, 0.30, 0.05);
    p.rate = 0.1;
    p.delta = DeltaStarSpec::uniform_alphabet();
    p.mode = XiMode::LowerBound;
    p.grids.p_y_points = 11;
    p.grids.rho_points = 65;
    p.grids.s_points = 65;
    p.grids.refinement_rounds = 3;
    XiResult r = xi_lower_bound(p);
    CHECK(r.xi == doctest::Approx(1.0).epsilon(0.03));
    CHECK(replay_witness(p, r) == doctest::Approx(r.xi).epsilon(1e-9));
}

TEST_CASE("exact solver on a singleton at zero rate") {
    XiProblem p;
    p.family = ChannelFamily::singleton(bsc(0.1));
    p.rate = 0.0;
    p.delta = DeltaStarSpec::uniform_alphabet();
    p.mode = XiMode::Exact;
    p.grids.p_y_points = 9;
    p.grids.conditional_points = 9;
    p.grids.rho_points = 25;
    p.grids.s_points = 25;
    p.grids.refinement_rounds = 3;
    XiResult r = xi_exact(p);
    CHECK(r.xi == doctest::Approx(1.0).epsilon(0.02));
    CHECK(replay_witness(p, r) == doctest::Approx(r.xi).epsilon(1e-9));
}

TEST_CASE("exact solver dominates the lower bound and hits one on a BSC grid") {
    XiProblem p;
    p.family = ChannelFamily::bsc_interval(0.05, 0.25, 0.05);
    p.rate = 0.1;
    p.delta = DeltaStarSpec::uniform_alphabet();
    p.mode = XiMode::Exact;
    p.grids.p_y_points = 9;
    p.grids.conditional_points = 9;
    p.grids.rho_points = 25;
    p.grids.s_points = 25;
    p.grids.refinement_rounds = 3;
    XiResult ex = xi_exact(p);
    CHECK(ex.xi == doctest::Approx(1.0).epsilon(0.05));

    XiProblem lb = p;
    lb.mode = XiMode::LowerBound;
    lb.grids.p_y_points = 11;
    lb.grids.rho_points = 65;
    lb.grids.s_points = 65;
    XiResult lbr = xi_lower_bound(lb);
    CHECK(lbr.xi <= ex.xi + 0.05);
    CHECK(replay_witness(p, ex) == doctest::Approx(ex.xi).epsilon(1e-9));
}

TEST_CASE("exact solver alphabet guard") {
    Mat w(5, 5);
    w.setConstant(0.2);
    XiProblem p;
    p.family = ChannelFamily::singleton(Dmc(w));
    p.rate = 0.1;
    p.mode = XiMode::Exact;
    CHECK_THROWS_AS(xi_exact(p), std::invalid_argument);
}

TEST_CASE("xi is non-increasing in rate on a singleton family") {
    ChannelFamily fam = ChannelFamily::singleton(bsc(0.1));
    double prev = std::numeric_limits<double>::infinity();
    for (double R : {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3}) {
        const XiResult r = xi_lb_bsc_closed_form(fam, R, 150, 2);
        CHECK(r.xi <= prev + 0.02);
        prev = r.xi;
    }
}

TEST_CASE("log_moment_rate") {
    const Pmf uy = Pmf::uniform(2);
    CHECK(log_moment_rate(bsc(0.1), 0.0, 0.7, 0.1, uy, DeltaStarSpec::uniform_alphabet()) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(log_moment_rate(bsc(0.1), 1.0, 0.0, 0.1, uy, DeltaStarSpec::uniform_alphabet()) ==
          doctest::Approx(-kLn2).epsilon(1e-10));
    // with xi > 0 the rate shifts by alpha xi E_r^*
    const double er = bsc_Er_star(0.1, 0.1).value;
    CHECK(log_moment_rate(bsc(0.1), 1.0, 1.0, 0.1, uy, DeltaStarSpec::uniform_alphabet()) ==
          doctest::Approx(er - kLn2).epsilon(1e-10));
}

TEST_CASE("lower-bound solver with a constant-composition neighborhood") {
    // radius zero pins the X-marginal to the fair coin; on the BSC the
    // constrained minimizers coincide with the unconstrained ones, so the
    // fraction is one again
    XiProblem p;
    p.family = ChannelFamily::singleton(bsc(0.1));
    p.rate = 0.1;
    p.delta = DeltaStarSpec::type_neighborhood(Pmf::uniform(2), 0.0);
    p.mode = XiMode::LowerBound;
    p.grids.p_y_points = 7;
    p.grids.conditional_points = 21;
    p.grids.rho_points = 17;
    p.grids.s_points = 17;
    p.grids.refinement_rounds = 2;
    XiResult r = xi_lower_bound(p);
    CHECK(r.xi == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("problem validation") {
    XiProblem p;
    p.rate = -0.1;
    CHECK_THROWS_AS(solve_xi(p), std::invalid_argument);
    p.rate = 0.1;
    p.grids.rho_points = 1;
    CHECK_THROWS_AS(solve_xi(p), std::invalid_argument);
    p.grids.rho_points = 33;
    p.mode = XiMode::BscClosedForm;
    p.delta = DeltaStarSpec::iid_ref(Pmf{0.3, 0.7});
    CHECK_THROWS_AS(solve_xi(p), std::invalid_argument);
}

TEST_CASE("lower-bound solver reaches one on the full acceptance grid") {
    XiProblem p;
    p.family = ChannelFamily::bsc_interval(0.05, 0.30, 0.0125);
    p.rate = 0.1;
    p.delta = DeltaStarSpec::uniform_alphabet();
    p.mode = XiMode::LowerBound;
    p.grids.p_y_points = 21;
    p.grids.rho_points = 65;
    p.grids.s_points = 65;
    p.grids.refinement_rounds = 3;
    XiResult r = xi_lower_bound(p);
    CHECK(r.xi == doctest::Approx(1.0).epsilon(0.03));
    CHECK(replay_witness(p, r) == doctest::Approx(r.xi).epsilon(1e-9));
}

TEST_CASE("exact solver with a constant-composition neighborhood") {
    // infeasible joints (marginal outside the neighborhood) must not drag
    // the outer minimization down
    XiProblem p;
    p.family = ChannelFamily::singleton(bsc(0.1));
    p.rate = 0.1;
    p.delta = DeltaStarSpec::type_neighborhood(Pmf::uniform(2), 0.05);
    p.mode = XiMode::Exact;
    p.grids.p_y_points = 7;
    p.grids.conditional_points = 9;
    p.grids.rho_points = 17;
    p.grids.s_points = 17;
    p.grids.refinement_rounds = 1;
    XiResult r = xi_exact(p);
    CHECK(r.xi > 0.5); // collapses to -inf if infeasible joints leak through
    CHECK(r.xi < 1.3);
}
