#include "cmx/decoders.hpp"

#include "cmx/rng.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cmx {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

MinimaxMetric MinimaxMetric::make(const ChannelFamily& family, double xi, double rate) {
    if (xi < 0.0 || xi > 1.0) throw std::domain_error("MinimaxMetric: xi outside [0,1]");
    MinimaxMetric m;
    for (const auto& e : family.grid()) {
        m.log_w.push_back(e.channel.log_mat());
        const Mat& w = e.channel.mat();
        m.symmetric_binary.push_back(w.rows() == 2 && w.cols() == 2 && w(0, 0) == w(1, 1) &&
                                     w(0, 1) == w(1, 0));
        double er;
        if (e.theta.has_value())
            er = bsc_Er_star(*e.theta, rate).value;
        else
            er = er_star(e.channel, Pmf::uniform(e.channel.x_size()), rate).value;
        m.bonus.push_back(xi * er);
    }
    return m;
}

double MinimaxMetric::value(const TypeStats& type) const {
    const double n = static_cast<double>(type.n);
    double best = -kInf;
    for (std::size_t t = 0; t < log_w.size(); ++t) {
        const Mat& lw = log_w[t];
        double s = 0.0;
        bool dead = false;
        if (symmetric_binary[t]) {
            const int mismatch = type.counts(0, 1) + type.counts(1, 0);
            const int match = static_cast<int>(type.n) - mismatch;
            if ((mismatch > 0 && lw(0, 1) == -kInf) || (match > 0 && lw(0, 0) == -kInf))
                dead = true;
            else
                s = match * lw(0, 0) + mismatch * lw(0, 1);
        } else {
            for (Eigen::Index a = 0; a < lw.rows() && !dead; ++a) {
                for (Eigen::Index b = 0; b < lw.cols(); ++b) {
                    const int c = type.counts(a, b);
                    if (c == 0) continue;
                    if (lw(a, b) == -kInf) {
                        dead = true;
                        break;
                    }
                    s += c * lw(a, b);
                }
            }
        }
        if (dead) continue;
        const double v = s / n + bonus[t];
        if (v > best) best = v;
    }
    return best;
}

double MinimaxMetric::value(std::span<const Symbol> x, std::span<const Symbol> y) const {
    const int ax = static_cast<int>(log_w[0].rows());
    const int ay = static_cast<int>(log_w[0].cols());
    return value(joint_type(x, y, ax, ay));
}

double f_metric(std::span<const Symbol> x, std::span<const Symbol> y, const ChannelFamily& family,
                double xi, const std::function<double(std::size_t)>& er_star_of_index) {
    if (x.size() != y.size()) throw std::invalid_argument("f_metric: length mismatch");
    MinimaxMetric m;
    for (std::size_t i = 0; i < family.size(); ++i) {
        m.log_w.push_back(family.grid()[i].channel.log_mat());
        m.bonus.push_back(xi * er_star_of_index(i));
    }
    return m.value(x, y);
}

double f_metric(std::span<const Symbol> x, std::span<const Symbol> y, const MinimaxMetric& metric) {
    if (x.size() != y.size()) throw std::invalid_argument("f_metric: length mismatch");
    return metric.value(x, y);
}

double rho_metric(std::span<const Symbol> x, std::span<const Symbol> y) {
    const auto h = hamming(x, y);
    const long n = static_cast<long>(x.size());
    const long folded = std::min(h.distance, n - h.distance);
    return static_cast<double>(folded) / static_cast<double>(n);
}

double mmi_metric(std::span<const Symbol> x, std::span<const Symbol> y) {
    return mutual_information(joint_type(x, y).to_joint_pmf());
}

DecoderKind DecoderKind::ml(Dmc channel, TiePolicy tie) {
    DecoderKind k;
    k.variant = Variant::Ml;
    k.ml_channel = std::move(channel);
    k.tie_policy = tie;
    return k;
}

DecoderKind DecoderKind::minimax(ChannelFamily family, double xi, double rate, TiePolicy tie) {
    if (xi < 0.0 || xi > 1.0) throw std::domain_error("DecoderKind::minimax: xi outside [0,1]");
    DecoderKind k;
    k.variant = Variant::Minimax;
    k.metric = std::make_shared<MinimaxMetric>(MinimaxMetric::make(family, xi, rate));
    k.family = std::move(family);
    k.xi = xi;
    k.rate = rate;
    k.tie_policy = tie;
    return k;
}

DecoderKind DecoderKind::rho(TiePolicy tie) {
    DecoderKind k;
    k.variant = Variant::RhoMetric;
    k.tie_policy = tie;
    return k;
}

DecoderKind DecoderKind::mmi(TiePolicy tie) {
    DecoderKind k;
    k.variant = Variant::Mmi;
    k.tie_policy = tie;
    return k;
}

DecodeOutcome decode_block(const Codebook& cb, std::span<const Symbol> y, const DecoderKind& kind) {
    if (cb.block_length() != y.size()) throw std::invalid_argument("decode_block: length mismatch");
    const std::size_t M = cb.message_count();
    DecodeOutcome out;
    out.metrics.resize(M);

    std::shared_ptr<const MinimaxMetric> mm = kind.metric;
    std::optional<Mat> ml_log;
    if (kind.variant == DecoderKind::Variant::Minimax && !mm)
        mm = std::make_shared<MinimaxMetric>(MinimaxMetric::make(*kind.family, kind.xi, kind.rate));
    if (kind.variant == DecoderKind::Variant::Ml) ml_log = kind.ml_channel->log_mat();

    const bool minimize = kind.variant == DecoderKind::Variant::RhoMetric;
    for (std::size_t m = 0; m < M; ++m) {
        double v = 0.0;
        switch (kind.variant) {
            case DecoderKind::Variant::Ml: {
                double s = 0.0;
                for (std::size_t i = 0; i < y.size(); ++i) {
                    const double l = (*ml_log)(cb.words[m][i], y[i]);
                    if (l == -kInf) {
                        s = -kInf;
                        break;
                    }
                    s += l;
                }
                v = s;
                break;
            }
            case DecoderKind::Variant::Minimax:
                v = mm->value(cb.words[m], y);
                break;
            case DecoderKind::Variant::RhoMetric:
                v = rho_metric(cb.words[m], y);
                break;
            case DecoderKind::Variant::Mmi:
                v = mmi_metric(cb.words[m], y);
                break;
        }
        out.metrics[m] = v;
    }

    std::size_t best = 0;
    for (std::size_t m = 1; m < M; ++m) {
        const bool better = minimize ? out.metrics[m] < out.metrics[best] : out.metrics[m] > out.metrics[best];
        if (better) best = m;
    }
    std::vector<std::size_t> arg;
    for (std::size_t m = 0; m < M; ++m)
        if (out.metrics[m] == out.metrics[best]) arg.push_back(m);
    out.tied = arg.size() > 1;

    switch (kind.tie_policy) {
        case TiePolicy::LowestIndex:
            out.chosen = static_cast<int>(arg.front());
            break;
        case TiePolicy::TieIsError:
            out.chosen = out.tied ? kDecodeError : static_cast<int>(arg.front());
            break;
        case TiePolicy::Randomized: {
            RngStream s(kind.tie_seed);
            out.chosen = static_cast<int>(arg[s.next_u64() % arg.size()]);
            break;
        }
    }
    return out;
}

ViterbiResult viterbi_min(const Trellis& trellis, std::span<const Symbol> y, BranchMetric metric,
                          OptimizeSense sense, double theta) {
    const int T = trellis.total_branches();
    const int S = trellis.state_count();
    const int A = 1 << trellis.b;
    if (static_cast<int>(y.size()) != trellis.n * T) throw std::invalid_argument("viterbi_min: received length mismatch");

    double log_keep = 0.0, log_flip = 1.0;
    if (metric == BranchMetric::NegLogLik) {
        if (!(theta > 0.0 && theta < 1.0)) throw std::domain_error("viterbi_min: theta outside (0,1)");
        log_keep = -std::log1p(-theta);
        log_flip = -std::log(theta);
    }

    // received branch words, packed
    std::vector<std::uint32_t> yw(T, 0);
    for (int t = 0; t < T; ++t)
        for (int c = 0; c < trellis.n; ++c)
            if (y[static_cast<std::size_t>(t) * trellis.n + c]) yw[t] |= 1u << c;

    const bool minimize = sense == OptimizeSense::Minimize;
    const double worst = minimize ? kInf : -kInf;
    std::vector<double> cost(S, worst);
    cost[0] = 0.0;
    // survivor[t*S + s] = (prev_state, input) packed
    std::vector<int> surv(static_cast<std::size_t>(T) * S, -1);
    std::vector<double> next(S);
    for (int t = 0; t < T; ++t) {
        std::fill(next.begin(), next.end(), worst);
        const int input_limit = t < trellis.L ? A : 1; // zero tail
        int* surv_t = surv.data() + static_cast<std::size_t>(t) * S;
        for (int s = 0; s < S; ++s) {
            if (cost[s] == worst) continue;
            for (int a = 0; a < input_limit; ++a) {
                const auto& e = trellis.edge(t, s, a);
                const int d = std::popcount(e.out ^ yw[t]);
                const double c = cost[s] + (metric == BranchMetric::HammingDistance
                                                ? static_cast<double>(d)
                                                : d * log_flip + (trellis.n - d) * log_keep);
                const int packed = s * A + a;
                const bool better = minimize ? c < next[e.next_state] : c > next[e.next_state];
                // metric ties break toward the lower-index predecessor
                if (better || (c == next[e.next_state] && surv_t[e.next_state] > packed)) {
                    next[e.next_state] = c;
                    surv_t[e.next_state] = packed;
                }
            }
        }
        cost.swap(next);
    }
    if (cost[0] == worst) throw std::logic_error("viterbi_min: zero state unreachable");

    ViterbiResult res;
    res.metric = cost[0];
    res.info.assign(static_cast<std::size_t>(trellis.b) * trellis.L, 0);
    int state = 0;
    for (int t = T - 1; t >= 0; --t) {
        const int packed = surv[static_cast<std::size_t>(t) * S + state];
        const int a = packed % A;
        state = packed / A;
        if (t < trellis.L)
            for (int r = 0; r < trellis.b; ++r)
                res.info[static_cast<std::size_t>(t) * trellis.b + r] = (a >> r) & 1;
    }
    return res;
}

TwoTrellisResult viterbi_two_trellis(const Trellis& trellis, std::span<const Symbol> y) {
    const ViterbiResult mn = viterbi_min(trellis, y, BranchMetric::HammingDistance, OptimizeSense::Minimize);
    const ViterbiResult mx = viterbi_min(trellis, y, BranchMetric::HammingDistance, OptimizeSense::Maximize);
    // compare as integer distances; the folded normalization happens once
    const long n_total = static_cast<long>(y.size());
    const long d_min = std::lround(mn.metric);
    const long d_max_folded = n_total - std::lround(mx.metric);
    TwoTrellisResult r;
    if (d_max_folded < d_min) {
        r.info = mx.info;
        r.rho = static_cast<double>(d_max_folded) / static_cast<double>(n_total);
    } else {
        r.info = mn.info;
        r.rho = static_cast<double>(d_min) / static_cast<double>(n_total);
    }
    return r;
}

} // namespace cmx
