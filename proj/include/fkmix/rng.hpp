#pragma once

#include <array>
#include <cstdint>

namespace fkmix {

using Philox4x32Ctr = std::array<uint32_t, 4>;
using Philox4x32Key = std::array<uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., SC11).
Philox4x32Ctr philox4x32(Philox4x32Ctr ctr, Philox4x32Key key);

// Counter-based stream keyed by (seed, stream id). The cursor counts 128-bit
// blocks consumed, so a stream position is a single integer that can be saved
// and restored exactly.
class Stream {
public:
    Stream(uint64_t seed, uint64_t id) : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)}, id_(id) {}

    // Uniform double in [0,1) with 53 random bits.
    double uniform() {
        uint64_t hi = word(), lo = word();
        return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
    }

    uint32_t word() {
        if (pos_ == 4)
            refill();
        return buf_[pos_++];
    }

    // Uniform integer in [0, n), by rejection.
    uint32_t below(uint32_t n);

    // Number of 128-bit blocks generated so far.
    uint64_t cursor() const { return cursor_; }
    void seek(uint64_t block) {
        cursor_ = block;
        pos_ = 4;
    }
    uint64_t id() const { return id_; }

private:
    void refill();

    Philox4x32Key key_;
    uint64_t id_;
    uint64_t cursor_ = 0;
    std::array<uint32_t, 4> buf_{};
    int pos_ = 4;
};

} // namespace fkmix
