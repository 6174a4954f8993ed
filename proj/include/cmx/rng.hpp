#pragma once

#include <cstdint>

namespace cmx {

// Counter-based pseudo-random stream built on the splitmix64 mixer.
// A stream is (key, counter); draws are mix(key + i*GOLDEN) so any
// substream derived by fork() is independent of draw order elsewhere.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : key_(mix(seed ^ 0x9e3779b97f4a7c15ull)), counter_(0) {}

    std::uint64_t next_u64() {
        return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ull);
    }

    // uniform in [0,1) with 53 random bits
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool next_bit() { return (next_u64() & 1ull) != 0; }

    // derived stream; independent of this stream's counter position
    RngStream fork(std::uint64_t id) const {
        RngStream s(0);
        s.key_ = mix(key_ ^ mix(id + 0xbf58476d1ce4e5b9ull));
        s.counter_ = 0;
        return s;
    }

    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

} // namespace cmx
