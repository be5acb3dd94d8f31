#pragma once

#include "lswn/kernel.hpp"
#include "lswn/panel.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace lswn {

/// Estimated trend m(i/n, u_j) on the full panel lattice.
struct MeanSurface {
    double bandwidth = 0.0;
    FunctionalPanel values;
};

/// n x n smoother matrix of discrete local-linear weights in rescaled time.
/// Row i holds w_l((i+1)/n) for l = 0..n-1; every row sums to one and
/// reproduces constant and linear trends exactly, including near the ends.
/// Throws DegenerateWindow when the local design is singular (b too small).
[[nodiscard]] Eigen::MatrixXd local_linear_matrix(std::size_t n, double b, Kernel kernel);

[[nodiscard]] MeanSurface estimate_mean(const FunctionalPanel& panel, double b, Kernel kernel);

/// X - m, elementwise.
[[nodiscard]] ResidualPanel compute_residuals(const FunctionalPanel& panel, const MeanSurface& mean);

struct GcvPoint {
    double bandwidth;
    double score;  ///< +inf when the candidate was skipped
    double trace;  ///< tr Q(b)
};

struct BandwidthChoice {
    double bandwidth;
    std::vector<GcvPoint> curve;
};

/// 12 log-spaced candidates on [0.5 n^{-1/4}, min(2 n^{-1/4}, 0.49)].
[[nodiscard]] std::vector<double> default_b_grid(std::size_t n);

/// Generalized cross-validation over the candidate bandwidths. Candidates with
/// nb < 3, a singular local design, or 1 - tr Q / n <= 0 are skipped.
/// Ties (within rounding) resolve toward the larger bandwidth.
[[nodiscard]] BandwidthChoice gcv_bandwidth(const FunctionalPanel& panel, std::span<const double> grid,
                                            Kernel kernel);

namespace detail {
/// Index of the minimal score, ties (|s - min| <= tol) resolved toward the
/// largest index. Infinite scores never win. Returns npos if all infinite.
[[nodiscard]] std::size_t argmin_prefer_last(std::span<const double> scores, double tol);
inline constexpr std::size_t npos = static_cast<std::size_t>(-1);
[[nodiscard]] std::vector<double> log_spaced(double lo, double hi, std::size_t count);
}  // namespace detail

}  // namespace lswn
