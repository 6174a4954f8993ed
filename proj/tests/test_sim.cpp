#include "cmx/sim.hpp"

#include "cmx/exponents.hpp"
#include "cmx/xi.hpp"

#include <doctest.h>

#include <cmath>

using namespace cmx;

TEST_CASE("clopper-pearson intervals") {
    // k = 0: hi solves (1-p)^n = alpha/2
    BinomialCi z = clopper_pearson(0, 100);
    CHECK(z.lo == 0.0);
    CHECK(z.hi == doctest::Approx(1.0 - std::pow(0.025, 1.0 / 100.0)).epsilon(1e-6));
    BinomialCi f = clopper_pearson(100, 100);
    CHECK(f.hi == 1.0);
    CHECK(f.lo == doctest::Approx(std::pow(0.025, 1.0 / 100.0)).epsilon(1e-6));
    BinomialCi m = clopper_pearson(10, 100);
    CHECK(m.lo < 0.1);
    CHECK(m.hi > 0.1);
    CHECK(m.lo == doctest::Approx(0.0490047).epsilon(1e-3)); // standard reference value
    CHECK(m.hi == doctest::Approx(0.1762226).epsilon(1e-3));
    CHECK_THROWS_AS(clopper_pearson(5, 0), std::invalid_argument);
}

TEST_CASE("block simulation basics") {
    SUBCASE("noiseless channel with distinct codewords never errs") {
        SimConfig cfg;
        cfg.ensemble = IidEnsemble{Pmf::uniform(2), 8, 24};
        cfg.channel = noiseless_binary();
        cfg.decoder = DecoderKind::rho();
        cfg.trials = 500;
        cfg.seed = 5;
        const SimReport rep = run_block_sim(cfg);
        CHECK(rep.errors == 0);
        CHECK(rep.p_hat == 0.0);
    }
    SUBCASE("theta = 1/2 with two messages errs half the time") {
        SimConfig cfg;
        cfg.ensemble = IidEnsemble{Pmf::uniform(2), 2, 16};
        cfg.theta = 0.5;
        cfg.decoder = DecoderKind::ml(bsc(0.5));
        cfg.trials = 20000;
        cfg.seed = 11;
        const SimReport rep = run_block_sim(cfg);
        CHECK(rep.p_hat == doctest::Approx(0.5).epsilon(0.04));
        CHECK(rep.ci95.lo <= rep.p_hat);
        CHECK(rep.ci95.hi >= rep.p_hat);
    }
    SUBCASE("determinism across worker counts") {
        SimConfig cfg;
        cfg.ensemble = IidEnsemble{Pmf::uniform(2), 8, 32};
        cfg.theta = 0.1;
        cfg.decoder = DecoderKind::rho();
        cfg.trials = 4000;
        cfg.seed = 42;
        cfg.threads = 1;
        const SimReport one = run_block_sim(cfg);
        cfg.threads = 7;
        const SimReport many = run_block_sim(cfg);
        CHECK(one.errors == many.errors);
        cfg.seed = 43;
        CHECK(run_block_sim(cfg).errors != one.errors);
    }
    SUBCASE("fixed-code mode is deterministic too") {
        SimConfig cfg;
        cfg.ensemble = LinearEnsemble{3, 12, true};
        cfg.theta = 0.08;
        cfg.decoder = DecoderKind::rho();
        cfg.trials = 2000;
        cfg.seed = 9;
        cfg.fresh_code_per_trial = false;
        const SimReport a = run_block_sim(cfg);
        const SimReport b = run_block_sim(cfg);
        CHECK(a.errors == b.errors);
    }
}

TEST_CASE("convolutional simulation") {
    SUBCASE("noiseless fixture errs only on exact codeword collisions") {
        // random time-varying generators occasionally map two info words to
        // codewords at distance zero from each other; a noiseless run can
        // only err through such a tie
        RngStream rng(3);
        int clean_checked = 0;
        for (int rep = 0; rep < 40; ++rep) {
            RngStream code_rng = rng.fork(rep * 2);
            RngStream msg_rng = rng.fork(rep * 2 + 1);
            ConvCodeSpec spec = sample_conv(1, 2, 3, 10, code_rng);
            BitVec info(10);
            for (auto& bit : info) bit = msg_rng.next_bit() ? 1 : 0;
            const BitVec y = encode_conv(spec, info);
            long zero_dist_others = 0;
            for (unsigned long m = 0; m < (1ul << 10); ++m) {
                BitVec other(10);
                for (int i = 0; i < 10; ++i) other[i] = (m >> i) & 1;
                if (other == info) continue;
                if (hamming(encode_conv(spec, other), y).distance == 0) ++zero_dist_others;
            }
            if (zero_dist_others > 0) continue;
            const Trellis tr = build_trellis(spec);
            CHECK(viterbi_two_trellis(tr, y).info == info);
            ++clean_checked;
        }
        CHECK(clean_checked >= 15);
    }
    SUBCASE("two-trellis decoding is invariant to complementing the stream") {
        RngStream rng(77);
        for (int rep = 0; rep < 30; ++rep) {
            RngStream code_rng = rng.fork(rep * 2);
            RngStream y_rng = rng.fork(rep * 2 + 1);
            ConvCodeSpec spec = sample_conv(1, 2, 3, 10, code_rng);
            Trellis tr = build_trellis(spec);
            BitVec y(spec.code_length());
            for (auto& s : y) s = y_rng.next_bit() ? 1 : 0;
            auto a = viterbi_two_trellis(tr, y);
            BitVec yc = y;
            for (auto& s : yc) s ^= 1;
            auto b = viterbi_two_trellis(tr, yc);
            CHECK(a.rho == doctest::Approx(b.rho).epsilon(1e-12));
            // identical estimates whenever the winner is strict
            auto mn = viterbi_min(tr, y, BranchMetric::HammingDistance, OptimizeSense::Minimize);
            auto mx = viterbi_min(tr, y, BranchMetric::HammingDistance, OptimizeSense::Maximize);
            if (std::lround(mn.metric) + std::lround(mx.metric) != static_cast<long>(y.size()))
                CHECK(a.info == b.info);
        }
    }
    SUBCASE("determinism across worker counts") {
        SimConfig cfg;
        cfg.ensemble = ConvEnsemble{1, 2, 3, 32};
        cfg.theta = 0.04;
        cfg.trials = 1500;
        cfg.seed = 21;
        cfg.threads = 1;
        const SimReport one = run_conv_sim(cfg);
        cfg.threads = 5;
        const SimReport many = run_conv_sim(cfg);
        CHECK(one.bit_errors == many.bit_errors);
    }
}

TEST_CASE("competitive ratio table") {
    SimConfig base;
    base.ensemble = IidEnsemble{Pmf::uniform(2), 4, 24};
    base.decoder = DecoderKind::rho();
    base.trials = 3000;
    base.seed = 33;
    ChannelFamily fam = ChannelFamily::bsc_interval(0.05, 0.15, 0.05);
    const double rate = std::log(4.0) / 24.0;
    SUBCASE("xi = 0 gives raw error rates") {
        RatioTable t = competitive_ratio(base, fam, 0.0, rate);
        for (const auto& row : t.rows) {
            if (!row.upper_bound_only) CHECK(row.ratio == doctest::Approx(row.p_hat).epsilon(1e-12));
        }
        CHECK(t.rows.size() == fam.size());
    }
    SUBCASE("zero-error cells are flagged as upper bounds") {
        SimConfig clean = base;
        clean.trials = 50;
        ChannelFamily tiny = ChannelFamily::bsc_interval(0.001, 0.001, 1.0);
        RatioTable t = competitive_ratio(clean, tiny, 1.0, rate);
        for (const auto& row : t.rows) {
            if (row.errors == 0) {
                CHECK(row.upper_bound_only);
                CHECK(row.ratio > 0.0);
            }
        }
    }
}

TEST_CASE("exponent regression") {
    std::vector<std::pair<double, double>> pts;
    for (double n : {10.0, 20.0, 40.0, 80.0}) pts.emplace_back(n, std::exp(-0.1 * n));
    RegressionResult r = exponent_regression(pts);
    CHECK(r.slope == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(r.excluded.empty());

    std::vector<std::pair<double, double>> scaled;
    for (double n : {10.0, 20.0, 40.0}) scaled.emplace_back(n, 3.7 * std::exp(-0.1 * n));
    RegressionResult r2 = exponent_regression(scaled);
    CHECK(r2.slope == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(r2.intercept == doctest::Approx(-std::log(3.7)).epsilon(1e-9));

    std::vector<std::pair<double, double>> with_zero{{10.0, 1e-2}, {20.0, 0.0}, {40.0, 1e-4}, {80.0, 1e-8}};
    RegressionResult r3 = exponent_regression(with_zero);
    CHECK(r3.excluded == std::vector<std::size_t>{1});

    CHECK_THROWS_AS(exponent_regression({{10.0, 0.1}, {20.0, 0.01}}), std::invalid_argument);
    CHECK_THROWS_AS(exponent_regression({{10.0, 0.0}, {20.0, 0.0}, {30.0, 1e-3}}), std::domain_error);
}

TEST_CASE("exact message error equality for linear codes") {
    ChannelFamily fam = ChannelFamily::bsc_interval(0.05, 0.30, 0.0125);
    const double rate = 2.0 * std::log(2.0) / 6.0;
    for (bool systematic : {false, true}) {
        for (int seed = 0; seed < 5; ++seed) {
            RngStream rng(100 + seed);
            LinearCodeSpec spec = sample_linear(2, 6, systematic, rng);
            const DecoderKind kind = DecoderKind::minimax(fam, 1.0, rate, TiePolicy::TieIsError);
            const std::vector<double> pe = exact_message_error(spec, 0.1, kind);
            REQUIRE(pe.size() == 4);
            const double spread = *std::max_element(pe.begin(), pe.end()) -
                                  *std::min_element(pe.begin(), pe.end());
            CHECK(spread <= 1e-12);
        }
    }
}

TEST_CASE("exact message error matches an exhaustive average") {
    RngStream rng(55);
    LinearCodeSpec spec = sample_linear(2, 6, false, rng);
    const DecoderKind kind = DecoderKind::rho(TiePolicy::TieIsError);
    const std::vector<double> pe = exact_message_error(spec, 0.1, kind);
    // independent enumeration through decode_block
    const Codebook cb = linear_codebook(spec);
    double avg = 0.0;
    for (std::size_t m = 0; m < 4; ++m) {
        double pm = 0.0;
        for (unsigned yb = 0; yb < 64; ++yb) {
            std::vector<Symbol> y(6);
            for (int i = 0; i < 6; ++i) y[i] = (yb >> i) & 1;
            const DecodeOutcome out = decode_block(cb, y, kind);
            if (out.chosen != static_cast<int>(m)) {
                const auto h = hamming(cb.words[m], y);
                pm += std::pow(0.1, double(h.distance)) * std::pow(0.9, double(6 - h.distance));
            }
        }
        avg += pm / 4.0;
        CHECK(pm == doctest::Approx(pe[m]).epsilon(1e-12));
    }
    double avg2 = 0.0;
    for (double v : pe) avg2 += v / 4.0;
    CHECK(avg == doctest::Approx(avg2).epsilon(1e-12));
}

TEST_CASE("nonlinear codebooks generally break the per-message equality") {
    // negative control: unequal pairwise-distance profiles
    Codebook cb;
    cb.words = {{0, 0, 0, 0, 0, 0}, {1, 1, 0, 0, 0, 0}, {1, 0, 1, 0, 1, 0}, {1, 1, 1, 1, 1, 1}};
    const DecoderKind kind = DecoderKind::ml(bsc(0.1), TiePolicy::TieIsError);
    std::vector<double> pe(4, 0.0);
    for (unsigned yb = 0; yb < 64; ++yb) {
        std::vector<Symbol> y(6);
        for (int i = 0; i < 6; ++i) y[i] = (yb >> i) & 1;
        const DecodeOutcome out = decode_block(cb, y, kind);
        for (std::size_t m = 0; m < 4; ++m) {
            if (out.chosen != static_cast<int>(m)) {
                const auto h = hamming(cb.words[m], y);
                pe[m] += std::pow(0.1, double(h.distance)) * std::pow(0.9, double(6 - h.distance));
            }
        }
    }
    const double spread = *std::max_element(pe.begin(), pe.end()) - *std::min_element(pe.begin(), pe.end());
    CHECK(spread > 1e-6);
}

TEST_CASE("brute-force moment oracle") {
    const Dmc w = bsc(0.1);
    std::vector<Symbol> y{0, 1, 0, 1, 0, 1, 0, 1};
    MomentQ iid;
    iid.q = Pmf::uniform(2);
    SUBCASE("alpha = 0 gives exactly zero") {
        CHECK(brute_force_moment(w, 0.0, 0.3, 0.1, y, iid) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("constant integrand at theta = 1/2") {
        std::vector<Symbol> y4{0, 1, 1, 0};
        const double a = 0.7;
        const double v = brute_force_moment(bsc(0.5), a, 0.0, 0.1, y4, iid);
        CHECK(v == doctest::Approx(a * std::log(0.5)).epsilon(1e-12));
    }
    SUBCASE("iid coding distributions match the single-letter rate exactly") {
        const Pmf uy = Pmf::uniform(2);
        for (double a : {0.3, 0.5, 1.0}) {
            for (double xi : {0.0, 1.0}) {
                const double brute = brute_force_moment(w, a, xi, 0.1, y, iid);
                const double rate = log_moment_rate(w, a, xi, 0.1, uy, DeltaStarSpec::uniform_alphabet());
                CHECK(brute == doctest::Approx(rate).epsilon(1e-10));
            }
        }
    }
    SUBCASE("type-class mode shows a shrinking method-of-types gap") {
        for (double a : {0.5, 1.0}) {
            double prev_gap = 1e9;
            for (int N : {8, 12}) {
                std::vector<Symbol> yy(N);
                for (int i = 0; i < N; ++i) yy[i] = i % 2;
                MomentQ tc;
                tc.kind = MomentQ::Kind::TypeClass;
                tc.q = Pmf::uniform(2);
                tc.ones = N / 2;
                const double brute = brute_force_moment(w, a, 0.0, 0.1, yy, tc);
                const double rate = log_moment_rate(w, a, 0.0, 0.1, Pmf::uniform(2),
                                                    DeltaStarSpec::type_neighborhood(Pmf::uniform(2), 0.0));
                const double gap = std::abs(brute - rate);
                CHECK(gap < prev_gap);
                prev_gap = gap;
            }
        }
    }
    SUBCASE("capacity guard") {
        std::vector<Symbol> big(24, 0);
        CHECK_THROWS_AS(brute_force_moment(w, 1.0, 0.0, 0.1, big, iid), std::invalid_argument);
    }
}

TEST_CASE("matched ML is never beaten beyond Monte Carlo noise") {
    SimConfig cfg;
    cfg.ensemble = IidEnsemble{Pmf::uniform(2), 16, 16};
    cfg.theta = 0.05;
    cfg.trials = 20000;
    cfg.seed = 99;
    cfg.decoder = DecoderKind::ml(bsc(0.05));
    const SimReport ml = run_block_sim(cfg);
    for (auto make : {+[] { return DecoderKind::rho(); }, +[] { return DecoderKind::mmi(); }}) {
        cfg.decoder = make();
        const SimReport other = run_block_sim(cfg);
        CHECK(ml.p_hat <= other.ci95.hi + 0.01);
    }
}

TEST_CASE("competitive ratios stay sub-exponential at the solved fraction") {
    // doubling N must not grow the worst measured ratio by more than x3
    ChannelFamily fam = ChannelFamily::bsc_interval(0.25, 0.30, 0.05);
    const double xi = xi_lb_bsc_closed_form(fam, std::log(16.0) / 32.0, 150, 2).xi;
    double prev_max = -1.0;
    bool all_measured = true;
    for (std::size_t n : {32, 64, 128}) {
        SimConfig base;
        base.ensemble = IidEnsemble{Pmf::uniform(2), 16, n};
        base.decoder = DecoderKind::rho();
        base.trials = 30000;
        base.seed = 4000 + n;
        const RatioTable t = competitive_ratio(base, fam, xi, std::log(16.0) / double(n));
        double max_measured = 0.0;
        for (const auto& row : t.rows) {
            if (row.upper_bound_only)
                all_measured = false;
            else
                max_measured = std::max(max_measured, row.ratio);
        }
        REQUIRE(max_measured > 0.0);
        if (prev_max > 0.0) CHECK(max_measured <= 3.0 * prev_max);
        prev_max = max_measured;
    }
    CHECK(all_measured);
}

TEST_CASE("exact enumeration rejects oversized blocks") {
    RngStream rng(1);
    LinearCodeSpec spec = sample_linear(2, 16, false, rng);
    CHECK_THROWS_AS(exact_message_error(spec, 0.1, DecoderKind::rho(TiePolicy::TieIsError)),
                    std::invalid_argument);
}
