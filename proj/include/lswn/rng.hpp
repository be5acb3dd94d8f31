#pragma once

#include <array>
#include <cstdint>

namespace lswn::rng {

/// Philox4x32-10 (Salmon et al., SC'11): a keyed bijection on 128-bit
/// counters. Every draw is a pure function of (key, counter), so streams are
/// reproducible and independent of evaluation order or thread count.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    [[nodiscard]] static Counter apply(Counter ctr, Key key) noexcept {
        constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
        constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
            key[0] += w0;
            key[1] += w1;
        }
        return ctr;
    }
};

/// Purposes that partition the counter space so unrelated draws never collide.
enum class Stream : std::uint32_t {
    Innovation = 1,
    Assignment = 2,
    Multiplier = 3,
    Replicate = 4,
};

/// Deterministic random source keyed by a 64-bit seed. A draw is addressed by
/// (stream, a, b): e.g. (Innovation, time, coordinate) or (Multiplier,
/// replicate, index).
class CounterRng {
public:
    constexpr explicit CounterRng(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    [[nodiscard]] std::array<std::uint32_t, 4> raw(Stream stream, std::uint64_t a, std::uint32_t b) const noexcept {
        return Philox4x32::apply({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), b,
                                  static_cast<std::uint32_t>(stream)},
                                 key_);
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    [[nodiscard]] double uniform(Stream stream, std::uint64_t a, std::uint32_t b) const noexcept {
        const auto r = raw(stream, a, b);
        return to_open_unit(r[0], r[1]);
    }

    /// Standard normal via Box-Muller on two independent uniforms.
    [[nodiscard]] double normal(Stream stream, std::uint64_t a, std::uint32_t b) const noexcept;

    /// 64-bit value, used to derive per-replicate seeds.
    [[nodiscard]] std::uint64_t bits64(Stream stream, std::uint64_t a, std::uint32_t b) const noexcept {
        const auto r = raw(stream, a, b);
        return (std::uint64_t{r[1]} << 32) | r[0];
    }

private:
    [[nodiscard]] static double to_open_unit(std::uint32_t lo, std::uint32_t hi) noexcept {
        const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    std::array<std::uint32_t, 2> key_;
};

/// Seed for replicate `index` of a study keyed by `master`.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

}  // namespace lswn::rng
