#pragma once

#include "lswn/config.hpp"
#include "lswn/panel.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

// Second-order statistics of the residual panel.
//
// Time indices are 0-based (row i is rescaled time (i+1)/n). Statistic
// centres are given as rescaled times t; on the window lattice t = c/n with
// c in {ceil(n tau), ..., n - ceil(n tau)}.

namespace lswn {

/// phi_{i,k}(u_j) = eps_{i-k}(u_j) eps_i(u_j)^T, the zero matrix when i < k.
[[nodiscard]] Eigen::MatrixXd lag_product(const ResidualPanel& resid, std::size_t i, std::size_t k, std::size_t j);

/// Dot products eps_i(u_j) . eps_{i-lag}(u_j) for 0 <= lag <= s_n together
/// with the band sums sum_{k=1}^{s_n} of the same diagonal, so that
/// tr(phi_{i,k} phi_{l,k}^T) summed over k is O(1) to look up.
class InnerProductTable {
public:
    InnerProductTable(const ResidualPanel& resid, std::size_t s_n);

    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] std::size_t grid_size() const noexcept { return grid_; }
    [[nodiscard]] std::size_t lags() const noexcept { return lags_; }

    /// eps_i . eps_l at grid j; requires 0 <= i - l <= s_n (zero if l would be negative).
    [[nodiscard]] double dot(std::size_t i, std::size_t l, std::size_t j) const noexcept {
        return dots_[index(i, i - l, j)];
    }
    /// sum_{k=1}^{s_n} eps_{i-k} . eps_{l-k} at grid j, terms with a negative index dropped.
    [[nodiscard]] double band_sum(std::size_t i, std::size_t l, std::size_t j) const noexcept {
        return bands_[index(i, i - l, j)];
    }

private:
    [[nodiscard]] std::size_t index(std::size_t i, std::size_t lag, std::size_t j) const noexcept {
        return (i * (lags_ + 1) + lag) * grid_ + j;
    }

    std::size_t n_, grid_, lags_;
    std::vector<double> dots_;
    std::vector<double> bands_;
};

/// tr U_i(t, u_j) through the rank-one reduction
///   2 sum_{l} K_tau(l/n - t) (eps_i . eps_l) sum_k (eps_{i-k} . eps_{l-k}),
/// l running over the one-sided gap window M_n < i - l <= s_n.
[[nodiscard]] double u_trace(const InnerProductTable& table, std::size_t i, double t, std::size_t j,
                             const StatWindow& win);

/// W[r][w][j] = K_tau((r - h)/n) tr U_{r+w}((h+w)/n, u_j) for r in 0..2h and
/// window offset w in 0..n-2h, h = ceil(n tau). Row r refers to 1-based time
/// r + w; row 0 and row 2h lie on the kernel boundary and are zero.
class WindowTensor {
public:
    WindowTensor(const StatWindow& win, std::size_t grid);

    [[nodiscard]] const StatWindow& window() const noexcept { return win_; }
    [[nodiscard]] std::size_t rows() const noexcept { return 2 * win_.half + 1; }
    [[nodiscard]] std::size_t offsets() const noexcept { return win_.offsets(); }
    [[nodiscard]] std::size_t grid_size() const noexcept { return grid_; }

    [[nodiscard]] double& at(std::size_t r, std::size_t w, std::size_t j) noexcept {
        return data_[(w * rows() + r) * grid_ + j];
    }
    [[nodiscard]] double at(std::size_t r, std::size_t w, std::size_t j) const noexcept {
        return data_[(w * rows() + r) * grid_ + j];
    }
    /// rows() x grid_size() row-major block of offset w.
    [[nodiscard]] std::span<const double> block(std::size_t w) const noexcept {
        return {data_.data() + w * rows() * grid_, rows() * grid_};
    }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

private:
    StatWindow win_;
    std::size_t grid_;
    std::vector<double> data_;
};

[[nodiscard]] WindowTensor build_window_tensor(const ResidualPanel& resid, const StatWindow& win,
                                               std::size_t jobs = 1);

/// offsets() x grid_size() matrix of sum_r W[r][w][j] = n tau s_n sum_k tr G_k((h+w)/n, u_j).
[[nodiscard]] Eigen::MatrixXd window_sums(const WindowTensor& tensor);

/// Q_n = (n tau s_n)^{-1/2} max_{w,j} |sum_r W[r][w][j]|.
[[nodiscard]] double q_statistic(const WindowTensor& tensor);

/// Brute-force sum_k tr G_k(t, u_j) from explicit p x p matrices over the
/// two-sided gap set M_n < |l - i| <= s_n. Cost O(n s_n^2 p^2); a reference
/// for small instances.
[[nodiscard]] double g_sum_oracle(const ResidualPanel& resid, double t, std::size_t j, const StatWindow& win);

/// Kernel estimate (n tau)^{-1} sum_i eps_{i-k} eps_i^T K_tau(i/n - t) of the
/// lag-k autocovariance surface at (t, u_j).
[[nodiscard]] Eigen::MatrixXd gamma_hat(const ResidualPanel& resid, std::size_t k, double t, std::size_t j,
                                        double tau, Kernel kernel);

/// Long-CSV `t,u,value` of sum_k tr G_k on the window lattice.
void write_gsum_surface(const WindowTensor& tensor, std::ostream& out);
/// Long-CSV `t,u,k,entry,value` of Gamma_k on the window lattice; entry is
/// the 1-based row-major position r*p + c + 1.
void write_gamma_surfaces(const ResidualPanel& resid, const StatWindow& win, std::ostream& out);

}  // namespace lswn
