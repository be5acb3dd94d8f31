#pragma once

#include "lswn/kernel.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace lswn {

/// How a tuning value was obtained.
enum class Provenance { User, Rule, Gcv, Mv };

[[nodiscard]] std::string_view to_string(Provenance p) noexcept;

/// Tuning parameters for the white-noise test. Unset optionals are resolved
/// automatically: s_n and M_n by rule of thumb, b and tau by GCV, L by the
/// minimum-volatility method.
struct TestConfig {
    std::optional<double> b;
    std::optional<double> tau;
    std::optional<std::size_t> s_n;
    std::optional<std::size_t> M_n;
    std::optional<std::size_t> L;
    std::size_t B = 1000;
    double alpha = 0.05;
    KernelId kernel = KernelId::Triangular;
    std::uint64_t seed = 0;
    /// Worker threads for the bootstrap replicates. Results do not depend on it.
    std::size_t jobs = 1;
    /// Keep the B bootstrap draws in the result.
    bool keep_draws = false;
};

template <typename T>
struct Tuned {
    T value{};
    Provenance source = Provenance::User;
};

/// A fully resolved configuration; satisfies every joint constraint.
struct ResolvedConfig {
    Tuned<double> b;
    Tuned<double> tau;
    Tuned<std::size_t> s_n;
    Tuned<std::size_t> M_n;
    Tuned<std::size_t> L;
    std::size_t B = 1000;
    double alpha = 0.05;
    KernelId kernel = KernelId::Triangular;
    std::uint64_t seed = 0;
};

/// Shape of the statistic for a given n, tau, s_n, M_n.
struct StatWindow {
    std::size_t n = 0;
    double width = 0.0;     ///< n * tau (snapped)
    std::size_t half = 0;   ///< ceil(n * tau)
    std::size_t lags = 0;   ///< s_n
    std::size_t gap = 0;    ///< M_n
    Kernel kernel{};

    /// Validates 2*half < n, s_n + 1 < half, 1 <= M_n < s_n. Throws ConfigInfeasible.
    static StatWindow make(std::size_t n, double tau, std::size_t s_n, std::size_t M_n, Kernel kernel);

    /// Number of window centres n - 2*half + 1.
    [[nodiscard]] std::size_t offsets() const noexcept { return n - 2 * half + 1; }
    /// K_tau at a time offset measured in index units.
    [[nodiscard]] double weight(double offset) const noexcept { return kernel(offset / width); }
};

/// Checks the scalar ranges (b, tau in (0, 1/2), B >= 100, alpha in (0,1), L >= 2)
/// and the joint constraints that involve n. Throws ConfigInfeasible with the
/// violated constraint spelled out.
void validate(const ResolvedConfig& cfg, std::size_t n);

}  // namespace lswn
