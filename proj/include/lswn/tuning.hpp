#pragma once

#include "lswn/config.hpp"
#include "lswn/covstat.hpp"
#include "lswn/panel.hpp"
#include "lswn/smoothing.hpp"

#include <json.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace lswn {

/// s_n = max(2, floor((log n)^2 / 6)).
[[nodiscard]] std::size_t rule_lags(std::size_t n);
/// M_n = max(1, floor(log(n) / 5)), capped below rule_lags(n).
[[nodiscard]] std::size_t rule_gap(std::size_t n);

/// 10 log-spaced candidates on [0.5 n^{-2/5}, min(2.5 n^{-2/5}, 0.45)].
[[nodiscard]] std::vector<double> default_tau_grid(std::size_t n);

/// GCV-type selection of the statistic bandwidth tau. For p <= 3 the
/// residual sum of squares runs over every (j, k) separately; for p > 3 the
/// residual matrices are summed over j and k before taking the Frobenius norm.
/// Candidates violating 2 ceil(n tau) < n or s_n + 1 < ceil(n tau) are skipped.
/// Ties resolve toward the larger tau.
struct TauChoice {
    double tau;
    std::vector<GcvPoint> curve;
};
[[nodiscard]] TauChoice gcv_tau(const ResidualPanel& resid, std::size_t s_n, std::span<const double> grid,
                                Kernel kernel);

/// Candidate block lengths {2, ..., 3 floor(n^{1/5})} restricted to L < ceil(n tau).
[[nodiscard]] std::vector<std::size_t> default_L_grid(std::size_t n, std::size_t half);

struct MvPoint {
    std::size_t L;
    double gamma;      ///< mean over offsets of sum_jj |S_{jj,w}|^2 / (2h - 2L)
    double objective;  ///< three-point volatility; NaN at the grid ends
};

struct LChoice {
    std::size_t L;
    std::vector<MvPoint> curve;
};

/// Index in 1..M-2 minimizing the three-point volatility of `gamma`, first one on ties.
[[nodiscard]] std::size_t mv_select(std::span<const double> gamma);

/// Minimum-volatility choice of the bootstrap block length. The grid needs at
/// least three ascending candidates, each below ceil(n tau) (GridTooSmall).
[[nodiscard]] LChoice mv_window(const WindowTensor& tensor, std::span<const std::size_t> grid);

/// Diagnostic curves retained from the automatic selectors.
struct TuningReport {
    std::vector<GcvPoint> gcv_b;
    std::vector<GcvPoint> gcv_tau;
    std::vector<MvPoint> mv;
};

[[nodiscard]] nlohmann::ordered_json to_json(const TuningReport& report);

}  // namespace lswn
