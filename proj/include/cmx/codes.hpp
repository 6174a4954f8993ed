#pragma once

#include "cmx/prob.hpp"
#include "cmx/rng.hpp"

#include <vector>

namespace cmx {

using BitVec = std::vector<Symbol>;

// M codewords of length N over a finite alphabet.
struct Codebook {
    std::vector<BitVec> words;

    std::size_t message_count() const { return words.size(); }
    std::size_t block_length() const { return words.empty() ? 0 : words[0].size(); }
    double rate() const; // (ln M)/N, nats/symbol
};

Codebook sample_iid_codebook(const Pmf& q, std::size_t M, std::size_t N, RngStream& rng);

// v = uG + v0 over GF(2); systematic codes carry an identity left block.
struct LinearCodeSpec {
    std::vector<BitVec> g; // K rows of length N
    BitVec v0;
    bool systematic = false;

    std::size_t k() const { return g.size(); }
    std::size_t n() const { return v0.size(); }
};

LinearCodeSpec sample_linear(std::size_t K, std::size_t N, bool systematic, RngStream& rng);
BitVec encode_linear(const LinearCodeSpec& spec, const BitVec& u);
Codebook linear_codebook(const LinearCodeSpec& spec);

// Time-varying convolutional code: b info bits and n code bits per branch,
// constraint-length factor K, L information branches plus K-1 zero tail
// branches for termination.
struct ConvCodeSpec {
    int b = 1;
    int n = 2;
    int K = 3;
    int L = 8;
    // generators[t][j] is the b x n matrix applied to u_{t-j}; v0[t] is the
    // additive branch vector at time t. Times run over the full horizon
    // L + K - 1 (termination included).
    std::vector<std::vector<std::vector<BitVec>>> generators;
    std::vector<BitVec> v0;

    int total_branches() const { return L + K - 1; }
    int code_length() const { return n * total_branches(); }
    int info_bits() const { return b * L; }
    int state_count() const { return 1 << (b * (K - 1)); }
};

ConvCodeSpec sample_conv(int b, int n, int K, int L, RngStream& rng);
BitVec encode_conv(const ConvCodeSpec& spec, const BitVec& info);

// Expanded transition table: per time, (state, input block) -> next state
// and n output bits (packed little-endian into `out`, n <= 32).
struct Trellis {
    struct Edge {
        int next_state = 0;
        std::uint32_t out = 0;
    };
    int b = 1, n = 2, K = 3, L = 8;
    std::vector<Edge> edges; // [t * S * A + state * A + input]

    int total_branches() const { return L + K - 1; }
    int state_count() const { return 1 << (b * (K - 1)); }
    int input_count() const { return 1 << b; }
    const Edge& edge(int t, int state, int input) const {
        return edges[(static_cast<std::size_t>(t) * state_count() + state) * input_count() + input];
    }
    BitVec edge_output(int t, int state, int input) const;
};

Trellis build_trellis(const ConvCodeSpec& spec);

} // namespace cmx
