#include "lswn/smoothing.hpp"

#include "lswn/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lswn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> as_series_matrix(const FunctionalPanel& panel) {
    return {panel.values().data(), static_cast<Eigen::Index>(panel.n()),
            static_cast<Eigen::Index>(panel.grid_size() * panel.dim())};
}

}  // namespace

namespace detail {

std::size_t argmin_prefer_last(std::span<const double> scores, double tol) {
    double best = std::numeric_limits<double>::infinity();
    for (double s : scores) best = std::min(best, s);
    if (!std::isfinite(best)) return npos;
    for (std::size_t k = scores.size(); k-- > 0;) {
        if (scores[k] <= best + tol) return k;
    }
    return npos;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t k = 0; k < count; ++k) {
        out[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1));
    }
    out.back() = hi;
    return out;
}

}  // namespace detail

Eigen::MatrixXd local_linear_matrix(std::size_t n, double b, Kernel kernel) {
    if (!(b > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
    const ScaledKernel k{kernel, scaled_width(n, b)};
    const auto reach = static_cast<std::ptrdiff_t>(std::ceil(k.width));
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const auto nn = static_cast<std::ptrdiff_t>(n);
    for (std::ptrdiff_t i = 0; i < nn; ++i) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - reach);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(nn - 1, i + reach);
        // Moments in integer-offset units; the weights are invariant to that scaling.
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (std::ptrdiff_t l = lo; l <= hi; ++l) {
            const double off = static_cast<double>(l - i);
            const double kv = k(off);
            s0 += kv;
            s1 += kv * off;
            s2 += kv * off * off;
        }
        const double det = s0 * s2 - s1 * s1;
        if (!(s0 > 0.0) || !(det > 1e-10 * s0 * s2)) {
            throw Error(ErrorCode::DegenerateWindow,
                        "local-linear design singular at t=" + std::to_string(static_cast<double>(i + 1) / nn) +
                            " for b=" + std::to_string(b) + " (bandwidth too small)");
        }
        for (std::ptrdiff_t l = lo; l <= hi; ++l) {
            const double off = static_cast<double>(l - i);
            q(i, l) = k(off) * (s2 - s1 * off) / det;
        }
    }
    return q;
}

MeanSurface estimate_mean(const FunctionalPanel& panel, double b, Kernel kernel) {
    if (panel.empty()) throw Error(ErrorCode::InvalidArgument, "empty panel");
    const auto q = local_linear_matrix(panel.n(), b, kernel);
    RowMatrix fitted = q * as_series_matrix(panel);
    std::vector<double> values(fitted.data(), fitted.data() + fitted.size());
    return {b, FunctionalPanel(panel.n(), panel.grid_size(), panel.dim(), std::move(values))};
}

ResidualPanel compute_residuals(const FunctionalPanel& panel, const MeanSurface& mean) {
    const auto& m = mean.values;
    if (m.n() != panel.n() || m.grid_size() != panel.grid_size() || m.dim() != panel.dim()) {
        throw Error(ErrorCode::InconsistentShape, "mean surface shape differs from panel");
    }
    std::vector<double> out(panel.values().size());
    const auto x = panel.values();
    const auto mv = m.values();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = x[k] - mv[k];
    return ResidualPanel(panel.n(), panel.grid_size(), panel.dim(), std::move(out));
}

std::vector<double> default_b_grid(std::size_t n) {
    const double centre = std::pow(static_cast<double>(n), -0.25);
    return detail::log_spaced(0.5 * centre, std::min(2.0 * centre, 0.49), 12);
}

BandwidthChoice gcv_bandwidth(const FunctionalPanel& panel, std::span<const double> grid, Kernel kernel) {
    if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "no bandwidth candidates");
    std::vector<double> sorted(grid.begin(), grid.end());
    std::sort(sorted.begin(), sorted.end());

    const auto x = as_series_matrix(panel);
    const double nd = static_cast<double>(panel.n());
    const double raw_scale = x.squaredNorm() / nd;

    BandwidthChoice out;
    std::vector<double> scores;
    for (double b : sorted) {
        GcvPoint pt{b, std::numeric_limits<double>::infinity(), 0.0};
        if (nd * b >= 3.0) {
            try {
                const auto q = local_linear_matrix(panel.n(), b, kernel);
                pt.trace = q.trace();
                const double denom = 1.0 - pt.trace / nd;
                if (denom > 0.0) {
                    const double rss = (x - q * x).squaredNorm() / nd;
                    pt.score = rss / (denom * denom);
                }
            } catch (const Error& e) {
                if (e.code() != ErrorCode::DegenerateWindow) throw;
            }
        }
        scores.push_back(pt.score);
        out.curve.push_back(pt);
    }
    const double best = *std::min_element(scores.begin(), scores.end());
    const auto pick = detail::argmin_prefer_last(scores, 1e-10 * std::abs(best) + 1e-14 * raw_scale);
    if (pick == detail::npos) {
        throw Error(ErrorCode::AllCandidatesDegenerate,
                    "every bandwidth candidate violates nb >= 3, has a singular local design, or has "
                    "1 - tr Q/n <= 0");
    }
    out.bandwidth = sorted[pick];
    return out;
}

}  // namespace lswn
