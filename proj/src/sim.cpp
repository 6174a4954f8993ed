#include "cmx/sim.hpp"

#include "cmx/exponents.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

namespace cmx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_binom_pmf(long k, long n, double p) {
    if (p <= 0.0) return k == 0 ? 0.0 : -kInf;
    if (p >= 1.0) return k == n ? 0.0 : -kInf;
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
           k * std::log(p) + (n - k) * std::log1p(-p);
}

// P(X <= k) for X ~ Binomial(n, p), summed in the log domain.
double binom_cdf(long k, long n, double p) {
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    double s = 0.0;
    for (long i = 0; i <= k; ++i) s += std::exp(log_binom_pmf(i, n, p));
    return std::min(s, 1.0);
}

double bisect_p(const std::function<double(double)>& f, double target, bool increasing) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double v = f(mid);
        const bool go_right = increasing ? v < target : v > target;
        if (go_right)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace

BinomialCi clopper_pearson(long k, long n, double confidence) {
    if (n <= 0 || k < 0 || k > n) throw std::invalid_argument("clopper_pearson: bad counts");
    const double alpha = 1.0 - confidence;
    BinomialCi ci;
    if (k == 0)
        ci.lo = 0.0;
    else
        ci.lo = bisect_p([&](double p) { return 1.0 - binom_cdf(k - 1, n, p); }, alpha / 2.0, true);
    if (k == n)
        ci.hi = 1.0;
    else
        ci.hi = bisect_p([&](double p) { return binom_cdf(k, n, p); }, alpha / 2.0, false);
    return ci;
}

namespace {

struct TrialCounts {
    long errors = 0;
    long bit_errors = 0;
};

// Runs `body(trial)` over all trials across threads; counts merge by sum so
// the result is independent of the partitioning.
TrialCounts accumulate_trials(long trials, int threads, const std::function<TrialCounts(long)>& body) {
    unsigned n = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    n = std::min<unsigned>(n, static_cast<unsigned>(std::max<long>(trials, 1)));
    if (n <= 1) {
        TrialCounts total;
        for (long t = 0; t < trials; ++t) {
            const TrialCounts c = body(t);
            total.errors += c.errors;
            total.bit_errors += c.bit_errors;
        }
        return total;
    }
    std::vector<TrialCounts> parts(n);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n; ++w) {
        pool.emplace_back([&, w]() {
            TrialCounts local;
            for (long t = w; t < trials; t += n) {
                const TrialCounts c = body(t);
                local.errors += c.errors;
                local.bit_errors += c.bit_errors;
            }
            parts[w] = local;
        });
    }
    for (auto& th : pool) th.join();
    TrialCounts total;
    for (const auto& p : parts) {
        total.errors += p.errors;
        total.bit_errors += p.bit_errors;
    }
    return total;
}

Dmc sim_channel(const SimConfig& cfg) {
    if (cfg.channel.has_value()) return *cfg.channel;
    return bsc(cfg.theta);
}

Codebook draw_code(const SimConfig& cfg, RngStream& rng) {
    if (const auto* iid = std::get_if<IidEnsemble>(&cfg.ensemble))
        return sample_iid_codebook(iid->q, iid->M, iid->N, rng);
    if (const auto* lin = std::get_if<LinearEnsemble>(&cfg.ensemble))
        return linear_codebook(sample_linear(lin->K, lin->N, lin->systematic, rng));
    throw std::invalid_argument("run_block_sim: convolutional ensemble given to the block harness");
}

} // namespace

SimReport run_block_sim(const SimConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("run_block_sim: trials < 1");
    const auto start = std::chrono::steady_clock::now();
    const Dmc channel = sim_channel(cfg);
    // the fixed code draws from its own substream so its internal forks can
    // never collide with the per-trial forks below
    RngStream master(cfg.seed);
    RngStream fixed_code_rng = master.fork(0);
    const Codebook fixed_code = cfg.fresh_code_per_trial ? Codebook{} : draw_code(cfg, fixed_code_rng);

    // The decoder is rebuilt per worker because Minimax caching is not
    // sharable during construction; decode itself is pure.
    const TrialCounts total = accumulate_trials(cfg.trials, cfg.threads, [&](long trial) {
        RngStream stream(cfg.seed);
        RngStream trial_rng = stream.fork(static_cast<std::uint64_t>(trial) + 1);
        RngStream code_rng = trial_rng.fork(1);
        RngStream msg_rng = trial_rng.fork(2);
        RngStream noise_rng = trial_rng.fork(3);
        const Codebook& cb = cfg.fresh_code_per_trial ? draw_code(cfg, code_rng) : fixed_code;
        const std::size_t M = cb.message_count();
        const std::size_t m = static_cast<std::size_t>(msg_rng.next_u64() % M);
        const std::vector<Symbol> y = transmit(channel, cb.words[m], noise_rng);
        const DecodeOutcome out = decode_block(cb, y, cfg.decoder);
        TrialCounts c;
        c.errors = (out.chosen != static_cast<int>(m)) ? 1 : 0;
        return c;
    });

    SimReport rep;
    rep.errors = total.errors;
    rep.trials = cfg.trials;
    rep.p_hat = static_cast<double>(total.errors) / static_cast<double>(cfg.trials);
    rep.ci95 = clopper_pearson(total.errors, cfg.trials);
    rep.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

SimReport run_conv_sim(const SimConfig& cfg) {
    const auto* conv = std::get_if<ConvEnsemble>(&cfg.ensemble);
    if (!conv) throw std::invalid_argument("run_conv_sim: needs a convolutional ensemble");
    if (cfg.trials < 1) throw std::invalid_argument("run_conv_sim: trials < 1");
    const auto start = std::chrono::steady_clock::now();
    const Dmc channel = sim_channel(cfg);
    const long info_bits_per_trial = static_cast<long>(conv->b) * conv->L;

    const TrialCounts total = accumulate_trials(cfg.trials, cfg.threads, [&](long trial) {
        RngStream stream(cfg.seed);
        RngStream trial_rng = stream.fork(static_cast<std::uint64_t>(trial) + 1);
        RngStream code_rng = trial_rng.fork(1);
        RngStream msg_rng = trial_rng.fork(2);
        RngStream noise_rng = trial_rng.fork(3);
        const ConvCodeSpec spec = sample_conv(conv->b, conv->n, conv->K, conv->L, code_rng);
        BitVec info(static_cast<std::size_t>(info_bits_per_trial));
        for (auto& bit : info) bit = msg_rng.next_bit() ? 1 : 0;
        const BitVec code = encode_conv(spec, info);
        const std::vector<Symbol> y = transmit(channel, code, noise_rng);
        const Trellis tr = build_trellis(spec);
        BitVec decoded;
        if (cfg.conv_decoder == SimConfig::ConvDecoder::TwoTrellis) {
            decoded = viterbi_two_trellis(tr, y).info;
        } else {
            decoded = viterbi_min(tr, y, BranchMetric::NegLogLik, OptimizeSense::Minimize, cfg.theta).info;
        }
        TrialCounts c;
        for (std::size_t i = 0; i < info.size(); ++i)
            if (info[i] != decoded[i]) ++c.bit_errors;
        c.errors = c.bit_errors > 0 ? 1 : 0;
        return c;
    });

    SimReport rep;
    rep.errors = total.errors;
    rep.trials = cfg.trials;
    rep.bit_errors = total.bit_errors;
    rep.info_bits = info_bits_per_trial * cfg.trials;
    rep.p_hat = static_cast<double>(total.bit_errors) / static_cast<double>(rep.info_bits);
    rep.ci95 = clopper_pearson(total.bit_errors, rep.info_bits);
    rep.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

RatioTable competitive_ratio(const SimConfig& base, const ChannelFamily& family, double xi, double rate) {
    RatioTable table;
    table.xi = xi;
    std::size_t n = 0;
    if (const auto* iid = std::get_if<IidEnsemble>(&base.ensemble)) n = iid->N;
    if (const auto* lin = std::get_if<LinearEnsemble>(&base.ensemble)) n = lin->N;
    if (n == 0) throw std::invalid_argument("competitive_ratio: block ensembles only");
    table.block_length = n;
    for (const auto& e : family.grid()) {
        if (!e.theta.has_value()) throw std::invalid_argument("competitive_ratio: BSC families only");
        SimConfig cfg = base;
        cfg.theta = *e.theta;
        cfg.channel.reset();
        const SimReport rep = run_block_sim(cfg);
        RatioRow row;
        row.theta = *e.theta;
        row.trials = rep.trials;
        row.errors = rep.errors;
        row.p_hat = rep.p_hat;
        row.ci95 = rep.ci95;
        row.er_star = bsc_Er_star(*e.theta, rate).value;
        const double denom = std::exp(-static_cast<double>(n) * xi * row.er_star);
        if (rep.errors == 0) {
            row.upper_bound_only = true;
            row.ratio = (3.0 / static_cast<double>(rep.trials)) / denom;
        } else {
            row.ratio = rep.p_hat / denom;
        }
        table.max_ratio = std::max(table.max_ratio, row.ratio);
        table.rows.push_back(row);
    }
    return table;
}

RegressionResult exponent_regression(const std::vector<std::pair<double, double>>& n_and_p) {
    if (n_and_p.size() < 3) throw std::invalid_argument("exponent_regression: need at least 3 points");
    RegressionResult res;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < n_and_p.size(); ++i) {
        if (n_and_p[i].second > 0.0)
            pts.emplace_back(n_and_p[i].first, -std::log(n_and_p[i].second));
        else
            res.excluded.push_back(i);
    }
    if (pts.size() < 2) throw std::domain_error("exponent_regression: fewer than 2 positive points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, yv] : pts) {
        sx += x;
        sy += yv;
        sxx += x * x;
        sxy += x * yv;
    }
    const double n = static_cast<double>(pts.size());
    res.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    res.intercept = (sy - res.slope * sx) / n;
    return res;
}

std::vector<double> exact_message_error(const LinearCodeSpec& spec, double theta, const DecoderKind& kind) {
    const std::size_t N = spec.n();
    if (N > 14) throw std::invalid_argument("exact_message_error: N > 14");
    if (!(theta > 0.0 && theta < 1.0)) throw std::domain_error("exact_message_error: theta outside (0,1)");
    const Codebook cb = linear_codebook(spec);
    const std::size_t M = cb.message_count();
    const std::size_t Y = 1ull << N;

    // Pack codewords as bit masks for distance computation.
    std::vector<std::uint32_t> cw(M, 0);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t i = 0; i < N; ++i)
            if (cb.words[m][i]) cw[m] |= 1u << i;

    // All decoder metrics here depend on (x, y) only through the Hamming
    // distance, so tabulate per distance.
    std::vector<double> metric_by_d(N + 1);
    bool maximize = true;
    switch (kind.variant) {
        case DecoderKind::Variant::Ml: {
            const double lt = std::log((*kind.ml_channel).prob(1, 0));
            const double lk = std::log((*kind.ml_channel).prob(0, 0));
            for (std::size_t d = 0; d <= N; ++d)
                metric_by_d[d] = static_cast<double>(d) * lt + static_cast<double>(N - d) * lk;
            break;
        }
        case DecoderKind::Variant::Minimax: {
            const MinimaxMetric mm = MinimaxMetric::make(*kind.family, kind.xi, kind.rate);
            for (std::size_t d = 0; d <= N; ++d) {
                double best = -kInf;
                for (std::size_t t = 0; t < mm.log_w.size(); ++t) {
                    const double v = (static_cast<double>(d) * mm.log_w[t](0, 1) +
                                      static_cast<double>(N - d) * mm.log_w[t](0, 0)) /
                                         static_cast<double>(N) +
                                     mm.bonus[t];
                    best = std::max(best, v);
                }
                metric_by_d[d] = best;
            }
            break;
        }
        case DecoderKind::Variant::RhoMetric: {
            maximize = false;
            for (std::size_t d = 0; d <= N; ++d)
                metric_by_d[d] = static_cast<double>(std::min(d, N - d)) / static_cast<double>(N);
            break;
        }
        case DecoderKind::Variant::Mmi:
            throw std::invalid_argument("exact_message_error: MMI depends on more than the distance");
    }

    std::vector<double> log_py_by_d(N + 1);
    for (std::size_t d = 0; d <= N; ++d)
        log_py_by_d[d] = static_cast<double>(d) * std::log(theta) + static_cast<double>(N - d) * std::log1p(-theta);

    std::vector<double> pe(M, 0.0);
    for (std::size_t yb = 0; yb < Y; ++yb) {
        // metric value per message
        std::vector<int> dist(M);
        for (std::size_t m = 0; m < M; ++m) dist[m] = std::popcount(cw[m] ^ static_cast<std::uint32_t>(yb));
        for (std::size_t m = 0; m < M; ++m) {
            const double own = metric_by_d[dist[m]];
            bool err = false;
            for (std::size_t mp = 0; mp < M && !err; ++mp) {
                if (mp == m) continue;
                const double other = metric_by_d[dist[mp]];
                // the error region counts ties against the sender
                err = maximize ? other >= own : other <= own;
            }
            if (err) pe[m] += std::exp(log_py_by_d[dist[m]]);
        }
    }
    return pe;
}

double brute_force_moment(const Dmc& w, double alpha, double xi, double rate,
                          std::span<const Symbol> y, const MomentQ& dist) {
    const Eigen::Index nx = w.x_size();
    const std::size_t N = y.size();
    const double cells = std::pow(static_cast<double>(nx), static_cast<double>(N));
    if (cells > static_cast<double>(1 << 20)) throw std::invalid_argument("brute_force_moment: |X|^N > 2^20");
    if (dist.kind == MomentQ::Kind::TypeClass && nx != 2)
        throw std::invalid_argument("brute_force_moment: type-class mode needs a binary alphabet");

    const Pmf& q = dist.q;
    const double er = er_star(w, q, rate).value;
    const Mat lw = w.log_mat();

    std::vector<Symbol> x(N, 0);
    std::vector<double> terms;
    double log_norm = -kInf; // ln of the total Q mass enumerated (type-class mode)
    long type_count = 0;
    const long total = static_cast<long>(cells);
    for (long idx = 0; idx < total; ++idx) {
        long rem = idx;
        long ones = 0;
        for (std::size_t i = 0; i < N; ++i) {
            x[i] = static_cast<Symbol>(rem % nx);
            rem /= nx;
            ones += x[i] == 1 ? 1 : 0;
        }
        double log_q = 0.0;
        if (dist.kind == MomentQ::Kind::Iid) {
            bool dead = false;
            for (std::size_t i = 0; i < N; ++i) {
                if (q[x[i]] <= 0.0) {
                    dead = true;
                    break;
                }
                log_q += std::log(q[x[i]]);
            }
            if (dead) continue;
        } else {
            if (ones != dist.ones) continue;
            ++type_count;
            log_q = 0.0; // uniform over the class; normalized afterwards
        }
        double f = 0.0;
        bool dead = false;
        for (std::size_t i = 0; i < N; ++i) {
            const double l = lw(x[i], y[i]);
            if (l == -kInf) {
                dead = true;
                break;
            }
            f += l;
        }
        if (dead) {
            // f = -inf: e^{N alpha f} is 0 for alpha > 0, 1 at alpha = 0,
            // divergent for alpha < 0
            if (alpha > 0.0) continue;
            if (alpha < 0.0) return kInf;
            terms.push_back(log_q);
            continue;
        }
        f = f / static_cast<double>(N) + xi * er;
        terms.push_back(log_q + static_cast<double>(N) * alpha * f);
    }
    if (dist.kind == MomentQ::Kind::TypeClass) {
        if (type_count == 0) throw std::invalid_argument("brute_force_moment: empty type class");
        log_norm = std::log(static_cast<double>(type_count));
        for (auto& t : terms) t -= log_norm;
    }
    if (terms.empty()) return -kInf;
    const double m = *std::max_element(terms.begin(), terms.end());
    double s = 0.0;
    for (const double t : terms) s += std::exp(t - m);
    return (m + std::log(s)) / static_cast<double>(N);
}

} // namespace cmx
