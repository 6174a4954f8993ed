#pragma once

#include "cmx/channel.hpp"
#include "cmx/codes.hpp"
#include "cmx/exponents.hpp"
#include "cmx/prob.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace cmx {

// Precomputed per-family pieces of the minimax metric
//   f(x,y) = max_theta [ E-hat ln P_theta(Y|X) + xi E^*(theta) ].
struct MinimaxMetric {
    std::vector<Mat> log_w;    // ln P_theta(y|x), -inf at zero transitions
    std::vector<double> bonus; // xi * E^*(theta), E^* at the given rate
    // symmetric 2x2 entries take a distance-only path: counts grouped into
    // matches/mismatches before multiplying, so the value depends on the
    // Hamming distance alone
    std::vector<bool> symmetric_binary;

    static MinimaxMetric make(const ChannelFamily& family, double xi, double rate);
    double value(const TypeStats& type) const;
    double value(std::span<const Symbol> x, std::span<const Symbol> y) const;
};

double f_metric(std::span<const Symbol> x, std::span<const Symbol> y, const ChannelFamily& family,
                double xi, const std::function<double(std::size_t)>& er_star_of_index);
double f_metric(std::span<const Symbol> x, std::span<const Symbol> y, const MinimaxMetric& metric);

// min{delta, 1-delta} of the normalized Hamming distance.
double rho_metric(std::span<const Symbol> x, std::span<const Symbol> y);

// Empirical mutual information of the pair's joint type.
double mmi_metric(std::span<const Symbol> x, std::span<const Symbol> y);

enum class TiePolicy { LowestIndex, TieIsError, Randomized };

struct DecoderKind {
    enum class Variant { Ml, Minimax, RhoMetric, Mmi };

    Variant variant = Variant::Ml;
    std::optional<Dmc> ml_channel;          // Ml
    std::optional<ChannelFamily> family;    // Minimax
    double xi = 1.0;                        // Minimax
    double rate = 0.0;                      // Minimax: rate at which E^* is taken
    std::shared_ptr<const MinimaxMetric> metric; // built once at construction
    TiePolicy tie_policy = TiePolicy::LowestIndex;
    std::uint64_t tie_seed = 0;             // Randomized

    static DecoderKind ml(Dmc channel, TiePolicy tie = TiePolicy::LowestIndex);
    static DecoderKind minimax(ChannelFamily family, double xi, double rate,
                               TiePolicy tie = TiePolicy::LowestIndex);
    static DecoderKind rho(TiePolicy tie = TiePolicy::LowestIndex);
    static DecoderKind mmi(TiePolicy tie = TiePolicy::LowestIndex);
};

constexpr int kDecodeError = -1;

struct DecodeOutcome {
    int chosen = kDecodeError; // message index, or kDecodeError under TieIsError
    bool tied = false;
    std::vector<double> metrics;
};

DecodeOutcome decode_block(const Codebook& cb, std::span<const Symbol> y, const DecoderKind& kind);

// --- Viterbi over a time-varying trellis -------------------------------

enum class BranchMetric { HammingDistance, NegLogLik };
enum class OptimizeSense { Minimize, Maximize };

struct ViterbiResult {
    BitVec info;
    double metric = 0.0;
};

ViterbiResult viterbi_min(const Trellis& trellis, std::span<const Symbol> y, BranchMetric metric,
                          OptimizeSense sense, double theta = 0.0);

struct TwoTrellisResult {
    BitVec info;
    double rho = 0.0;
};

// Minimum-distance and maximum-distance passes; the survivor whose
// normalized distance is farther from 1/2 wins, ties going to the
// minimum-distance pass.
TwoTrellisResult viterbi_two_trellis(const Trellis& trellis, std::span<const Symbol> y);

} // namespace cmx
