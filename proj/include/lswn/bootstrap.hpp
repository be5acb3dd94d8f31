#pragma once

#include "lswn/config.hpp"
#include "lswn/covstat.hpp"
#include "lswn/panel.hpp"
#include "lswn/tuning.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lswn {

/// Forward-minus-backward block sums of the window tensor,
///   S[jj][w][m] = (2 s_n^2 L)^{-1/2} (sum_{r=jj}^{jj+L-1} W[r][w][m] - sum_{r=jj-L}^{jj-1} W[r][w][m]),
/// for jj in L..2h-L.
class MovingSumTensor {
public:
    MovingSumTensor(std::size_t block, std::size_t half, std::size_t offsets, std::size_t grid, std::size_t lags);

    [[nodiscard]] std::size_t block() const noexcept { return block_; }
    [[nodiscard]] std::size_t half() const noexcept { return half_; }
    /// Count of positions jj = L..2h-L.
    [[nodiscard]] std::size_t positions() const noexcept { return 2 * half_ - 2 * block_ + 1; }
    [[nodiscard]] std::size_t offsets() const noexcept { return offsets_; }
    [[nodiscard]] std::size_t grid_size() const noexcept { return grid_; }
    [[nodiscard]] std::size_t lags() const noexcept { return lags_; }
    /// n of the underlying sample, offsets() + 2h - 1.
    [[nodiscard]] std::size_t n() const noexcept { return offsets_ + 2 * half_ - 1; }

    /// Position jj is absolute (L <= jj <= 2h - L).
    [[nodiscard]] double& at(std::size_t jj, std::size_t w, std::size_t m) noexcept {
        return data_[(w * positions() + (jj - block_)) * grid_ + m];
    }
    [[nodiscard]] double at(std::size_t jj, std::size_t w, std::size_t m) const noexcept {
        return data_[(w * positions() + (jj - block_)) * grid_ + m];
    }
    /// positions() x grid_size() row-major block of offset w.
    [[nodiscard]] std::span<const double> block_of(std::size_t w) const noexcept {
        return {data_.data() + w * positions() * grid_, positions() * grid_};
    }

private:
    std::size_t block_, half_, offsets_, grid_, lags_;
    std::vector<double> data_;
};

/// Throws WindowTooLarge unless 1 <= L < ceil(n tau).
[[nodiscard]] MovingSumTensor moving_sums(const WindowTensor& tensor, std::size_t L);

/// One bootstrap statistic
///   max_w |sum_{jj=L}^{2h-L} S[jj][w][.] R_{w+jj}|_inf / sqrt(h - L),
/// where multipliers[a - 1] holds R_a for absolute positions a = 1..n. The
/// multiplier at a given absolute position is shared by all windows.
[[nodiscard]] double bootstrap_draw(const MovingSumTensor& sums, std::span<const double> multipliers);

/// Standard-normal multipliers R_1..R_n of bootstrap replicate `replicate`.
[[nodiscard]] std::vector<double> bootstrap_multipliers(std::uint64_t seed, std::size_t replicate, std::size_t n);

/// B bootstrap statistics, replicate r driven by bootstrap_multipliers(seed, r, n).
/// Replicates are evaluated in batches with matrix products; the result does
/// not depend on `jobs`.
[[nodiscard]] std::vector<double> bootstrap_draws(const MovingSumTensor& sums, std::uint64_t seed, std::size_t B,
                                                  std::size_t jobs = 1);

/// The ceil((1 - alpha) B)-th smallest draw.
[[nodiscard]] double bootstrap_quantile(std::span<const double> draws, double alpha);

struct TestResult {
    double q_n = 0.0;
    double q_scaled = 0.0;  ///< Q_n / sqrt(s_n)
    double r_boot = 0.0;
    bool reject = false;
    ResolvedConfig config;
    TuningReport tuning;
    std::vector<double> draws;  ///< bootstrap statistics in replicate order
    bool keep_draws = false;    ///< serialize draws

    /// Decision at another level using the same draws.
    [[nodiscard]] bool reject_at(double alpha) const;
};

/// Everything the test needs before Q_n: resolved tuning, residuals, W.
struct PreparedTest {
    ResolvedConfig config;
    TuningReport tuning;
    ResidualPanel residuals;
    WindowTensor tensor;
};

/// Resolves every tuning parameter (rule -> GCV -> MV for unset values),
/// smooths, and builds W. Throws ConfigInfeasible before any smoothing when
/// user-fixed parameters cannot be satisfied.
[[nodiscard]] PreparedTest prepare_test(const FunctionalPanel& panel, const TestConfig& cfg);

/// As prepare_test on precomputed residuals, with b recorded as given.
[[nodiscard]] PreparedTest prepare_test_on_residuals(ResidualPanel resid, const TestConfig& cfg, Tuned<double> b);

/// Q_n, bootstrap draws and decision for a prepared test.
[[nodiscard]] TestResult finish_test(PreparedTest prepared, const TestConfig& cfg);

/// Full pipeline: prepare_test then finish_test.
[[nodiscard]] TestResult run_test(const FunctionalPanel& panel, const TestConfig& cfg);

/// Resolved values {b, tau, s_n, M_n, L, B, seed, kernel}.
[[nodiscard]] nlohmann::ordered_json params_to_json(const ResolvedConfig& config);
/// Which path produced each tuning value (user, rule, gcv, mv).
[[nodiscard]] nlohmann::ordered_json provenance_to_json(const ResolvedConfig& config);

[[nodiscard]] nlohmann::ordered_json to_json(const TestResult& result);

}  // namespace lswn
