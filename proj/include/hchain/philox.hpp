#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace hchain {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Output depends only on (counter, key), so any work split reproduces it.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter round(Counter c, Key k) {
        constexpr std::uint64_t m0 = 0xD2511F53u;
        constexpr std::uint64_t m1 = 0xCD9E8D57u;
        const std::uint64_t p0 = m0 * c[0];
        const std::uint64_t p1 = m1 * c[2];
        return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    }

    static Counter generate(Counter c, Key k) {
        constexpr std::uint32_t w0 = 0x9E3779B9u;
        constexpr std::uint32_t w1 = 0xBB67AE85u;
        for (int r = 0; r < 10; ++r) {
            c = round(c, k);
            k[0] += w0;
            k[1] += w1;
        }
        return c;
    }
};

/// Standard normal variate addressed by (seed, member, channel, site).
inline double philox_normal(std::uint64_t seed, std::uint64_t member, std::uint32_t channel,
                            std::int64_t site) {
    const auto s = static_cast<std::uint64_t>(site);
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(member),
                                  static_cast<std::uint32_t>(member >> 32),
                                  (channel << 16) ^ static_cast<std::uint32_t>(s >> 32)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const auto w = Philox4x32::generate(ctr, key);
    const std::uint64_t a = ((static_cast<std::uint64_t>(w[0]) << 32) | w[1]) >> 11;
    const std::uint64_t b = ((static_cast<std::uint64_t>(w[2]) << 32) | w[3]) >> 11;
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    const double u1 = (static_cast<double>(a) + 1.0) * scale;  // (0, 1]
    const double u2 = static_cast<double>(b) * scale;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace hchain
