#pragma once

#include <array>
#include <cstdint>

namespace skewdiff {

/// Philox4x32-10 counter-based block cipher.
/// Stateless: the same (counter, key) always yields the same block.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept {
        std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
        std::uint32_t k0 = key[0], k1 = key[1];
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * c0;
            const std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * c2;
            c0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
            c1 = static_cast<std::uint32_t>(p1);
            c2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
            c3 = static_cast<std::uint32_t>(p0);
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        return {c0, c1, c2, c3};
    }
};

/// A random stream keyed by (seed, stream_id). Every simulated path owns one
/// stream, so results do not depend on how paths are scheduled on threads.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    std::uint32_t next_u32() noexcept {
        if (used_ == 4) refill();
        return buffer_[used_++];
    }
    std::uint64_t next_u64() noexcept {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() noexcept { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }
    /// Standard normal by inversion.
    double normal() noexcept;
    double exponential(double rate) noexcept;

private:
    void refill() noexcept {
        buffer_ = Philox4x32::block(counter_, key_);
        // 64-bit block index in the low two words; the stream id occupies the high two.
        if (++counter_[0] == 0) ++counter_[1];
        used_ = 0;
    }

    Philox4x32::Key key_{};
    Philox4x32::Counter counter_{};
    Philox4x32::Counter buffer_{};
    int used_ = 4;
};

}  // namespace skewdiff
