#include "fkmix/rng.hpp"

namespace fkmix {

namespace {

constexpr uint32_t kMul0 = 0xD2511F53;
constexpr uint32_t kMul1 = 0xCD9E8D57;
constexpr uint32_t kWeyl0 = 0x9E3779B9;
constexpr uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
}

} // namespace

Philox4x32Ctr philox4x32(Philox4x32Ctr c, Philox4x32Key k) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

void Stream::refill() {
    buf_ = philox4x32({static_cast<uint32_t>(cursor_), static_cast<uint32_t>(cursor_ >> 32),
                       static_cast<uint32_t>(id_), static_cast<uint32_t>(id_ >> 32)},
                      key_);
    ++cursor_;
    pos_ = 0;
}

uint32_t Stream::below(uint32_t n) {
    uint32_t limit = static_cast<uint32_t>((0x100000000ULL / n) * n - 1);
    for (;;) {
        uint32_t w = word();
        if (w <= limit)
            return w % n;
    }
}

} // namespace fkmix
