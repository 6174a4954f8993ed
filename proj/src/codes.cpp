#include "cmx/codes.hpp"

#include <cmath>
#include <stdexcept>

namespace cmx {

double Codebook::rate() const {
    if (words.size() < 2 || block_length() == 0) throw std::logic_error("Codebook::rate: need M >= 2, N >= 1");
    return std::log(static_cast<double>(words.size())) / static_cast<double>(block_length());
}

namespace {
Symbol draw_symbol(const Pmf& q, RngStream& rng) {
    const double u = rng.next_double();
    double acc = 0.0;
    for (Eigen::Index a = 0; a < q.size(); ++a) {
        acc += q[a];
        if (u < acc) return static_cast<Symbol>(a);
    }
    return static_cast<Symbol>(q.size() - 1);
}
} // namespace

Codebook sample_iid_codebook(const Pmf& q, std::size_t M, std::size_t N, RngStream& rng) {
    if (M < 2) throw std::invalid_argument("sample_iid_codebook: M < 2");
    if (N < 1) throw std::invalid_argument("sample_iid_codebook: N < 1");
    Codebook cb;
    cb.words.resize(M);
    for (std::size_t m = 0; m < M; ++m) {
        RngStream s = rng.fork(m); // per-codeword substream
        cb.words[m].resize(N);
        for (std::size_t i = 0; i < N; ++i) cb.words[m][i] = draw_symbol(q, s);
    }
    return cb;
}

LinearCodeSpec sample_linear(std::size_t K, std::size_t N, bool systematic, RngStream& rng) {
    if (K < 1 || K >= N) throw std::invalid_argument("sample_linear: need 1 <= K < N");
    LinearCodeSpec spec;
    spec.systematic = systematic;
    spec.g.assign(K, BitVec(N, 0));
    for (std::size_t r = 0; r < K; ++r) {
        RngStream s = rng.fork(r);
        if (systematic) {
            spec.g[r][r] = 1;
            for (std::size_t c = K; c < N; ++c) spec.g[r][c] = s.next_bit() ? 1 : 0;
        } else {
            for (std::size_t c = 0; c < N; ++c) spec.g[r][c] = s.next_bit() ? 1 : 0;
        }
    }
    RngStream s = rng.fork(K);
    spec.v0.resize(N);
    for (std::size_t c = 0; c < N; ++c) spec.v0[c] = s.next_bit() ? 1 : 0;
    return spec;
}

BitVec encode_linear(const LinearCodeSpec& spec, const BitVec& u) {
    if (u.size() != spec.k()) throw std::invalid_argument("encode_linear: message length mismatch");
    BitVec v = spec.v0;
    for (std::size_t r = 0; r < spec.k(); ++r) {
        if (!u[r]) continue;
        for (std::size_t c = 0; c < spec.n(); ++c) v[c] ^= spec.g[r][c];
    }
    return v;
}

Codebook linear_codebook(const LinearCodeSpec& spec) {
    Codebook cb;
    const std::size_t M = 1ull << spec.k();
    cb.words.resize(M);
    for (std::size_t m = 0; m < M; ++m) {
        BitVec u(spec.k());
        for (std::size_t r = 0; r < spec.k(); ++r) u[r] = (m >> r) & 1u;
        cb.words[m] = encode_linear(spec, u);
    }
    return cb;
}

ConvCodeSpec sample_conv(int b, int n, int K, int L, RngStream& rng) {
    if (b < 1 || n < 1 || K < 1 || L < 1) throw std::invalid_argument("sample_conv: bad parameters");
    ConvCodeSpec spec;
    spec.b = b;
    spec.n = n;
    spec.K = K;
    spec.L = L;
    const int T = spec.total_branches();
    spec.generators.resize(T);
    spec.v0.resize(T);
    std::uint64_t id = 0;
    for (int t = 0; t < T; ++t) {
        spec.generators[t].resize(K);
        for (int j = 0; j < K; ++j) {
            spec.generators[t][j].assign(b, BitVec(n, 0));
            for (int r = 0; r < b; ++r) {
                RngStream s = rng.fork(id++);
                for (int c = 0; c < n; ++c) spec.generators[t][j][r][c] = s.next_bit() ? 1 : 0;
            }
        }
        RngStream s = rng.fork(id++);
        spec.v0[t].resize(n);
        for (int c = 0; c < n; ++c) spec.v0[t][c] = s.next_bit() ? 1 : 0;
    }
    return spec;
}

BitVec encode_conv(const ConvCodeSpec& spec, const BitVec& info) {
    if (static_cast<int>(info.size()) != spec.info_bits())
        throw std::invalid_argument("encode_conv: info length must be b*L");
    const int T = spec.total_branches();
    BitVec out(spec.code_length(), 0);
    auto info_block_bit = [&](int t, int r) -> Symbol {
        if (t < 0 || t >= spec.L) return 0; // zero history and zero tail
        return info[static_cast<std::size_t>(t) * spec.b + r];
    };
    for (int t = 0; t < T; ++t) {
        BitVec v = spec.v0[t];
        const int jmax = std::min(t, spec.K - 1);
        for (int j = 0; j <= jmax; ++j) {
            for (int r = 0; r < spec.b; ++r) {
                if (!info_block_bit(t - j, r)) continue;
                const BitVec& row = spec.generators[t][j][r];
                for (int c = 0; c < spec.n; ++c) v[c] ^= row[c];
            }
        }
        for (int c = 0; c < spec.n; ++c) out[static_cast<std::size_t>(t) * spec.n + c] = v[c];
    }
    return out;
}

BitVec Trellis::edge_output(int t, int state, int input) const {
    const std::uint32_t packed = edge(t, state, input).out;
    BitVec v(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) v[static_cast<std::size_t>(c)] = (packed >> c) & 1u;
    return v;
}

Trellis build_trellis(const ConvCodeSpec& spec) {
    if (spec.n > 32) throw std::invalid_argument("build_trellis: n > 32");
    Trellis tr;
    tr.b = spec.b;
    tr.n = spec.n;
    tr.K = spec.K;
    tr.L = spec.L;
    const int T = spec.total_branches();
    const int S = spec.state_count();
    const int A = 1 << spec.b;
    // pack generator rows as bit masks once
    std::vector<std::uint32_t> grow(static_cast<std::size_t>(T) * spec.K * spec.b, 0);
    std::vector<std::uint32_t> v0(static_cast<std::size_t>(T), 0);
    for (int t = 0; t < T; ++t) {
        for (int j = 0; j < spec.K; ++j)
            for (int r = 0; r < spec.b; ++r) {
                std::uint32_t m = 0;
                for (int c = 0; c < spec.n; ++c)
                    if (spec.generators[t][j][r][c]) m |= 1u << c;
                grow[(static_cast<std::size_t>(t) * spec.K + j) * spec.b + r] = m;
            }
        for (int c = 0; c < spec.n; ++c)
            if (spec.v0[t][c]) v0[t] |= 1u << c;
    }
    // state packs the previous K-1 input blocks, most recent in the low bits;
    // paths from the zero state keep not-yet-filled history bits at zero,
    // matching encode_conv
    tr.edges.resize(static_cast<std::size_t>(T) * S * A);
    for (int t = 0; t < T; ++t) {
        for (int s = 0; s < S; ++s) {
            std::uint32_t hist = v0[t];
            for (int j = 1; j <= spec.K - 1; ++j) {
                const int block = (s >> ((j - 1) * spec.b)) & (A - 1);
                for (int r = 0; r < spec.b; ++r)
                    if ((block >> r) & 1) hist ^= grow[(static_cast<std::size_t>(t) * spec.K + j) * spec.b + r];
            }
            for (int a = 0; a < A; ++a) {
                std::uint32_t v = hist;
                for (int r = 0; r < spec.b; ++r)
                    if ((a >> r) & 1) v ^= grow[(static_cast<std::size_t>(t) * spec.K + 0) * spec.b + r];
                Trellis::Edge& e = tr.edges[(static_cast<std::size_t>(t) * S + s) * A + a];
                e.out = v;
                e.next_state = ((s << spec.b) | a) & (S - 1);
            }
        }
    }
    return tr;
}

} // namespace cmx
