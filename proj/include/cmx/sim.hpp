#pragma once

#include "cmx/channel.hpp"
#include "cmx/codes.hpp"
#include "cmx/decoders.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cmx {

// Exact binomial (Clopper-Pearson) confidence interval.
struct BinomialCi {
    double lo = 0.0;
    double hi = 1.0;
};
BinomialCi clopper_pearson(long successes, long trials, double confidence = 0.95);

struct IidEnsemble {
    Pmf q = Pmf::uniform(2);
    std::size_t M = 2;
    std::size_t N = 1;
};
struct LinearEnsemble {
    std::size_t K = 1;
    std::size_t N = 2;
    bool systematic = false;
};
struct ConvEnsemble {
    int b = 1, n = 2, K = 3, L = 8;
};

struct SimConfig {
    std::variant<IidEnsemble, LinearEnsemble, ConvEnsemble> ensemble;
    double theta = 0.1; // true crossover probability (BSC channel)
    std::optional<Dmc> channel; // overrides theta when set (fixtures)
    DecoderKind decoder;
    long trials = 1;
    bool fresh_code_per_trial = true;
    std::uint64_t seed = 0;
    int threads = 0;
    // convolutional decoding flavor
    enum class ConvDecoder { TwoTrellis, MlViterbi } conv_decoder = ConvDecoder::TwoTrellis;
};

struct SimReport {
    long errors = 0;
    long trials = 0;
    double p_hat = 0.0;
    BinomialCi ci95;
    long bit_errors = 0;     // convolutional runs
    long info_bits = 0;      // convolutional runs: total decoded info bits
    double elapsed_seconds = 0.0;
};

SimReport run_block_sim(const SimConfig& cfg);
SimReport run_conv_sim(const SimConfig& cfg);

// Per-theta empirical competitive ratios p_hat / e^{-N xi E_r^*(theta)}.
struct RatioRow {
    double theta = 0.0;
    long trials = 0;
    long errors = 0;
    double p_hat = 0.0;
    BinomialCi ci95;
    double er_star = 0.0;
    double ratio = 0.0;
    bool upper_bound_only = false; // zero observed errors; 3/trials stand-in
};
struct RatioTable {
    std::vector<RatioRow> rows;
    double max_ratio = 0.0;
    double xi = 0.0;
    std::size_t block_length = 0;
};
RatioTable competitive_ratio(const SimConfig& base, const ChannelFamily& family, double xi, double rate);

// Least-squares slope of -ln p against N. Zero-error points are dropped and
// reported back through `excluded`.
struct RegressionResult {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<std::size_t> excluded;
};
RegressionResult exponent_regression(const std::vector<std::pair<double, double>>& n_and_p);

// Exact per-message error probabilities by full output enumeration (BSC).
std::vector<double> exact_message_error(const LinearCodeSpec& spec, double theta, const DecoderKind& kind);

// Finite-block moment oracle: (1/N) ln E_Q[e^{N alpha f_theta(X, y)}].
// Q is either iid q^N or uniform over the type class with `ones` ones
// (binary alphabets).
struct MomentQ {
    enum class Kind { Iid, TypeClass } kind = Kind::Iid;
    Pmf q = Pmf::uniform(2);
    long ones = 0; // TypeClass composition for binary X
};
double brute_force_moment(const Dmc& w, double alpha, double xi, double rate,
                          std::span<const Symbol> y, const MomentQ& dist);

} // namespace cmx
