#include "lswn/tuning.hpp"

#include "lswn/bootstrap.hpp"
#include "lswn/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lswn {

namespace {

/// Rows hold the per-time lag products vec(eps_{i-k} eps_i^T): one block per
/// (j, k) when p <= 3, or summed over (j, k) when p > 3.
std::vector<double> lag_product_rows(const ResidualPanel& resid, std::size_t s_n, std::size_t& cols) {
    const std::size_t n = resid.n(), grid = resid.grid_size(), p = resid.dim();
    const bool aggregate = p > 3;
    cols = aggregate ? p * p : grid * s_n * p * p;
    std::vector<double> rows(n * cols, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = rows.data() + i * cols;
        for (std::size_t j = 0; j < grid; ++j) {
            const auto cur = resid.point(i, j);
            for (std::size_t k = 1; k <= s_n && k <= i; ++k) {
                const auto lagged = resid.point(i - k, j);
                double* dst = aggregate ? row : row + (j * s_n + (k - 1)) * p * p;
                for (std::size_t a = 0; a < p; ++a) {
                    for (std::size_t c = 0; c < p; ++c) dst[a * p + c] += lagged[a] * cur[c];
                }
            }
        }
    }
    return rows;
}

}  // namespace

std::size_t rule_lags(std::size_t n) {
    const double l = std::log(static_cast<double>(n));
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(l * l / 6.0)));
}

std::size_t rule_gap(std::size_t n) {
    const double l = std::log(static_cast<double>(n));
    const auto gap = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(l / 5.0)));
    return std::min(gap, rule_lags(n) - 1);
}

std::vector<double> default_tau_grid(std::size_t n) {
    const double centre = std::pow(static_cast<double>(n), -0.4);
    return detail::log_spaced(0.5 * centre, std::min(2.5 * centre, 0.45), 10);
}

TauChoice gcv_tau(const ResidualPanel& resid, std::size_t s_n, std::span<const double> grid, Kernel kernel) {
    if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "no tau candidates");
    const std::size_t n = resid.n();
    if (s_n >= n) throw Error(ErrorCode::InvalidArgument, "s_n must be < n");
    std::vector<double> sorted(grid.begin(), grid.end());
    std::sort(sorted.begin(), sorted.end());

    std::size_t cols = 0;
    const auto rows = lag_product_rows(resid, s_n, cols);
    const double nd = static_cast<double>(n);
    double raw_scale = 0.0;
    for (std::size_t i = s_n; i < n; ++i) {
        for (std::size_t c = 0; c < cols; ++c) raw_scale += rows[i * cols + c] * rows[i * cols + c];
    }
    raw_scale /= nd;

    TauChoice out;
    std::vector<double> scores;
    std::vector<double> fitted(cols);
    for (double tau : sorted) {
        GcvPoint pt{tau, std::numeric_limits<double>::infinity(), 0.0};
        const double width = scaled_width(n, tau);
        const std::size_t half = scaled_ceil(n, tau);
        const bool feasible = tau > 0.0 && tau < 0.5 && 2 * half < n && s_n + 1 < half;
        if (feasible) {
            const ScaledKernel kern{kernel, width};
            std::vector<double> weights(2 * half + 1);
            for (std::size_t o = 0; o < weights.size(); ++o) {
                weights[o] = kern(static_cast<double>(o) - static_cast<double>(half)) / width;
            }
            double rss = 0.0;
            for (std::size_t i = s_n; i < n; ++i) {
                std::fill(fitted.begin(), fitted.end(), 0.0);
                const std::size_t lo = i >= half ? i - half : 0;
                const std::size_t hi = std::min(n - 1, i + half);
                for (std::size_t l = lo; l <= hi; ++l) {
                    const double wgt = weights[l + half - i];
                    if (wgt == 0.0) continue;
                    const double* src = rows.data() + l * cols;
                    for (std::size_t c = 0; c < cols; ++c) fitted[c] += wgt * src[c];
                }
                const double* obs = rows.data() + i * cols;
                for (std::size_t c = 0; c < cols; ++c) {
                    const double e = obs[c] - fitted[c];
                    rss += e * e;
                }
            }
            pt.trace = static_cast<double>(n - s_n) * kernel.peak() / width;
            const double denom = 1.0 - pt.trace / nd;
            if (denom > 0.0) pt.score = (rss / nd) / (denom * denom);
        }
        scores.push_back(pt.score);
        out.curve.push_back(pt);
    }
    const double best = *std::min_element(scores.begin(), scores.end());
    const auto pick = detail::argmin_prefer_last(scores, 1e-10 * std::abs(best) + 1e-14 * raw_scale);
    if (pick == detail::npos) {
        throw Error(ErrorCode::AllCandidatesInfeasible,
                    "no tau candidate satisfies 2*ceil(n*tau) < n and s_n + 1 < ceil(n*tau) (n=" +
                        std::to_string(n) + ", s_n=" + std::to_string(s_n) + ")");
    }
    out.tau = sorted[pick];
    return out;
}

std::vector<std::size_t> default_L_grid(std::size_t n, std::size_t half) {
    const auto root = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), 0.2) + 1e-9));
    std::vector<std::size_t> grid;
    for (std::size_t L = 2; L <= 3 * root && L < half; ++L) grid.push_back(L);
    return grid;
}

std::size_t mv_select(std::span<const double> gamma) {
    if (gamma.size() < 3) throw Error(ErrorCode::GridTooSmall, "minimum volatility needs >= 3 candidates");
    std::size_t best = 1;
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < gamma.size(); ++i) {
        const double mean = (gamma[i - 1] + gamma[i] + gamma[i + 1]) / 3.0;
        double obj = 0.0;
        for (std::size_t k = i - 1; k <= i + 1; ++k) obj += (gamma[k] - mean) * (gamma[k] - mean);
        obj *= 0.5;
        if (obj < best_obj) {
            best_obj = obj;
            best = i;
        }
    }
    return best;
}

LChoice mv_window(const WindowTensor& tensor, std::span<const std::size_t> grid) {
    const std::size_t half = tensor.window().half;
    if (grid.size() < 3) {
        throw Error(ErrorCode::GridTooSmall, "minimum volatility needs >= 3 block lengths below ceil(n*tau)=" +
                                                 std::to_string(half) + ", got " + std::to_string(grid.size()));
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid[k] < 1 || grid[k] >= half || (k > 0 && grid[k] <= grid[k - 1])) {
            throw Error(ErrorCode::GridTooSmall, "block lengths must ascend strictly within [1, ceil(n*tau))");
        }
    }
    LChoice out;
    std::vector<double> gamma;
    for (std::size_t L : grid) {
        const auto sums = moving_sums(tensor, L);
        double total = 0.0;
        for (std::size_t w = 0; w < sums.offsets(); ++w) {
            for (double v : sums.block_of(w)) total += v * v;
        }
        const double g = total / static_cast<double>(2 * half - 2 * L) / static_cast<double>(sums.offsets());
        gamma.push_back(g);
        out.curve.push_back({L, g, std::numeric_limits<double>::quiet_NaN()});
    }
    for (std::size_t i = 1; i + 1 < gamma.size(); ++i) {
        const double mean = (gamma[i - 1] + gamma[i] + gamma[i + 1]) / 3.0;
        double obj = 0.0;
        for (std::size_t k = i - 1; k <= i + 1; ++k) obj += (gamma[k] - mean) * (gamma[k] - mean);
        out.curve[i].objective = 0.5 * obj;
    }
    out.L = grid[mv_select(gamma)];
    return out;
}

nlohmann::ordered_json to_json(const TuningReport& report) {
    auto finite_or_null = [](double v) -> nlohmann::ordered_json {
        return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
    };
    nlohmann::ordered_json j;
    j["gcv_b"] = nlohmann::ordered_json::array();
    for (const auto& p : report.gcv_b) {
        j["gcv_b"].push_back({{"b", p.bandwidth}, {"score", finite_or_null(p.score)}, {"trace", p.trace}});
    }
    j["gcv_tau"] = nlohmann::ordered_json::array();
    for (const auto& p : report.gcv_tau) {
        j["gcv_tau"].push_back({{"tau", p.bandwidth}, {"score", finite_or_null(p.score)}, {"trace", p.trace}});
    }
    j["mv"] = nlohmann::ordered_json::array();
    for (const auto& p : report.mv) {
        j["mv"].push_back({{"L", p.L}, {"gamma", finite_or_null(p.gamma)}, {"objective", finite_or_null(p.objective)}});
    }
    return j;
}

}  // namespace lswn
