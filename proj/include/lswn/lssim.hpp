#pragma once

#include "lswn/bootstrap.hpp"
#include "lswn/config.hpp"
#include "lswn/panel.hpp"

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace lswn::sim {

enum class Hypothesis { Null, Alternative };

[[nodiscard]] std::string_view to_string(Hypothesis h) noexcept;
[[nodiscard]] Hypothesis parse_hypothesis(std::string_view s);

/// One simulated panel X_i(u) = m(i/n, u) + eps_i(u) with the common trend
/// m(t, u) = (1 + u)(10 sin(pi (t - 0.5)) + 1) in every coordinate.
///
/// Model 1: eps = (0.1 (u - 0.5)^2 + 0.8) eta_i.
/// Model 2: each coordinate scaled by a_1(u) or a_2(u) (coin flip per
///          coordinate) times sigma(t) = 0.5 + 0.5 sin(pi t).
/// Model 3: as model 2 but with a per-coordinate time-varying GARCH(1,1)
///          volatility.
/// Alternatives: models 1-2 add the tridiagonal functional AR(1) term
/// 6 sin(pi i / (2n)) (u - 0.5)^2 A_1 eps_{i-1}(u); model 3 adds the integral
/// operator A_2(i/n) int exp(-(u^2 + s^2)/2) eps_{i-1}(u) du discretized on the
/// grid. An alternative with delta = 0 generates the null panel.
struct SimSpec {
    int model = 1;
    Hypothesis hypothesis = Hypothesis::Null;
    std::size_t n = 200;
    std::size_t p = 5;
    std::size_t N = 50;
    double delta = 0.0;
    std::uint64_t seed = 0;
    std::size_t burn_in = 200;
};

void validate(const SimSpec& spec);

[[nodiscard]] FunctionalPanel generate(const SimSpec& spec);

/// Riemann double sum N^{-2} sum_{j,l} exp(-(u_j^2 + u_l^2)/2) on u_j = j/N.
[[nodiscard]] double operator_normalizer(std::size_t N);

/// Row of the Monte Carlo table.
struct McRow {
    int model;
    std::size_t n, p;
    double delta;
    double alpha;
    std::size_t reps;
    std::size_t rejections;

    [[nodiscard]] double rate() const noexcept { return reps ? static_cast<double>(rejections) / reps : 0.0; }
    /// Binomial standard error sqrt(f (1 - f) / reps).
    [[nodiscard]] double se() const noexcept;
};

struct McReport {
    std::vector<McRow> rows;
    bool complete = true;
};

struct McOptions {
    std::size_t reps = 200;
    std::vector<double> alphas{0.05};
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
    /// Called with the partial report after each chunk of replicates.
    std::function<void(const McReport&)> checkpoint;
    /// When set and raised, stops after the current chunk and returns a partial report.
    const std::atomic<bool>* stop = nullptr;
};

/// Runs the test on `reps` independent panels for every SimSpec in `cells`.
/// Replicate r of every cell uses the same derived seeds, so cells differing
/// only in delta or n share their innovations. The bootstrap B and tuning
/// come from `cfg`; its seed is replaced per replicate.
[[nodiscard]] McReport monte_carlo(const std::vector<SimSpec>& cells, const TestConfig& cfg,
                                   const McOptions& options);

void write_report_csv(const McReport& report, std::ostream& out);

}  // namespace lswn::sim
