#include "lswn/covstat.hpp"

#include "lswn/error.hpp"
#include "lswn/parallel.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

namespace lswn {

namespace {

/// Position n*t on the 1-based time axis, snapped onto the lattice when t = c/n.
double centre_position(std::size_t n, double t) {
    const double pos = t * static_cast<double>(n);
    const double r = std::round(pos);
    return std::abs(pos - r) < 1e-9 ? r : pos;
}

double dot_at(const ResidualPanel& resid, std::size_t a, std::size_t b, std::size_t j) {
    const auto x = resid.point(a, j);
    const auto y = resid.point(b, j);
    double s = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) s += x[d] * y[d];
    return s;
}

void write_num(std::ostream& out, double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.write(buf.data(), ptr - buf.data());
}

}  // namespace

Eigen::MatrixXd lag_product(const ResidualPanel& resid, std::size_t i, std::size_t k, std::size_t j) {
    if (i >= resid.n() || j >= resid.grid_size() || k == 0) {
        throw Error(ErrorCode::InvalidArgument, "lag_product index out of range");
    }
    const auto p = static_cast<Eigen::Index>(resid.dim());
    if (i < k) return Eigen::MatrixXd::Zero(p, p);
    const auto a = resid.point(i - k, j);
    const auto b = resid.point(i, j);
    const Eigen::Map<const Eigen::VectorXd> lagged(a.data(), p);
    const Eigen::Map<const Eigen::VectorXd> current(b.data(), p);
    return lagged * current.transpose();
}

InnerProductTable::InnerProductTable(const ResidualPanel& resid, std::size_t s_n)
    : n_(resid.n()), grid_(resid.grid_size()), lags_(s_n) {
    if (s_n >= n_) throw Error(ErrorCode::InvalidArgument, "s_n must be < n");
    dots_.assign(n_ * (lags_ + 1) * grid_, 0.0);
    bands_.assign(dots_.size(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t lag = 0; lag <= std::min(i, lags_); ++lag) {
            for (std::size_t j = 0; j < grid_; ++j) dots_[index(i, lag, j)] = dot_at(resid, i, i - lag, j);
        }
    }
    // Band sums along each diagonal; summed directly so values stay exact
    // relative to the direct double sum even for strongly trending series.
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t lag = 0; lag <= lags_; ++lag) {
            for (std::size_t j = 0; j < grid_; ++j) {
                double s = 0.0;
                for (std::size_t k = 1; k <= lags_ && k <= i; ++k) s += dots_[index(i - k, lag, j)];
                bands_[index(i, lag, j)] = s;
            }
        }
    }
}

double u_trace(const InnerProductTable& table, std::size_t i, double t, std::size_t j, const StatWindow& win) {
    const double pos = centre_position(table.n(), t);
    const std::size_t time = i + 1;
    if (time <= win.gap + 1) return 0.0;
    const std::size_t last = time - win.gap - 1;
    const std::size_t first = time > win.lags ? time - win.lags : 1;
    double acc = 0.0;
    for (std::size_t l = first; l <= last; ++l) {
        const double k = win.weight(static_cast<double>(l) - pos);
        if (k == 0.0) continue;
        acc += k * table.dot(i, l - 1, j) * table.band_sum(i, l - 1, j);
    }
    return 2.0 * acc;
}

WindowTensor::WindowTensor(const StatWindow& win, std::size_t grid)
    : win_(win), grid_(grid), data_((2 * win.half + 1) * win.offsets() * grid, 0.0) {}

WindowTensor build_window_tensor(const ResidualPanel& resid, const StatWindow& win, std::size_t jobs) {
    if (resid.n() != win.n) throw Error(ErrorCode::InconsistentShape, "window built for a different n");
    if (2 * win.half >= win.n) {
        throw Error(ErrorCode::ConfigInfeasible, "2*ceil(n*tau) >= n: no window centre exists");
    }
    const InnerProductTable table(resid, win.lags);
    WindowTensor tensor(win, resid.grid_size());
    const std::size_t h = win.half;
    const double n = static_cast<double>(win.n);
    parallel_for(tensor.offsets(), jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t w = begin; w < end; ++w) {
            const double t = static_cast<double>(h + w) / n;
            for (std::size_t r = 1; r < 2 * h; ++r) {
                const double weight = win.weight(static_cast<double>(r) - static_cast<double>(h));
                if (weight == 0.0) continue;
                const std::size_t i = r + w - 1;
                for (std::size_t j = 0; j < tensor.grid_size(); ++j) {
                    tensor.at(r, w, j) = weight * u_trace(table, i, t, j, win);
                }
            }
        }
    });
    return tensor;
}

Eigen::MatrixXd window_sums(const WindowTensor& tensor) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tensor.offsets()),
                                                 static_cast<Eigen::Index>(tensor.grid_size()));
    for (std::size_t w = 0; w < tensor.offsets(); ++w) {
        for (std::size_t r = 0; r < tensor.rows(); ++r) {
            for (std::size_t j = 0; j < tensor.grid_size(); ++j) {
                sums(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(j)) += tensor.at(r, w, j);
            }
        }
    }
    return sums;
}

double q_statistic(const WindowTensor& tensor) {
    const auto& win = tensor.window();
    const double scale = std::sqrt(win.width * static_cast<double>(win.lags));
    return window_sums(tensor).cwiseAbs().maxCoeff() / scale;
}

double g_sum_oracle(const ResidualPanel& resid, double t, std::size_t j, const StatWindow& win) {
    const double pos = centre_position(resid.n(), t);
    const auto n = static_cast<std::ptrdiff_t>(resid.n());
    const auto s = static_cast<std::ptrdiff_t>(win.lags);
    const auto gap = static_cast<std::ptrdiff_t>(win.gap);
    double total = 0.0;
    for (std::size_t k = 1; k <= win.lags; ++k) {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const double ki = win.weight(static_cast<double>(i + 1) - pos);
            if (ki == 0.0) continue;
            const Eigen::MatrixXd phi_i = lag_product(resid, static_cast<std::size_t>(i), k, j);
            for (std::ptrdiff_t l = std::max<std::ptrdiff_t>(0, i - s); l <= std::min(n - 1, i + s); ++l) {
                const auto dist = std::abs(l - i);
                if (dist <= gap) continue;
                const double kl = win.weight(static_cast<double>(l + 1) - pos);
                if (kl == 0.0) continue;
                const Eigen::MatrixXd phi_l = lag_product(resid, static_cast<std::size_t>(l), k, j);
                total += ki * kl * (phi_i * phi_l.transpose()).trace();
            }
        }
    }
    return total / (win.width * static_cast<double>(win.lags));
}

Eigen::MatrixXd gamma_hat(const ResidualPanel& resid, std::size_t k, double t, std::size_t j, double tau,
                          Kernel kernel) {
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "lag k must be >= 1");
    const ScaledKernel kern{kernel, scaled_width(resid.n(), tau)};
    const double pos = centre_position(resid.n(), t);
    const auto p = static_cast<Eigen::Index>(resid.dim());
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t i = k; i < resid.n(); ++i) {
        const double weight = kern(static_cast<double>(i + 1) - pos);
        if (weight == 0.0) continue;
        acc += weight * lag_product(resid, i, k, j);
    }
    return acc / kern.width;
}

void write_gsum_surface(const WindowTensor& tensor, std::ostream& out) {
    const auto& win = tensor.window();
    const auto sums = window_sums(tensor);
    const double scale = win.width * static_cast<double>(win.lags);
    out << "t,u,value\n";
    for (std::size_t w = 0; w < tensor.offsets(); ++w) {
        const double t = static_cast<double>(win.half + w) / static_cast<double>(win.n);
        for (std::size_t j = 0; j < tensor.grid_size(); ++j) {
            write_num(out, t);
            out << ',';
            write_num(out, static_cast<double>(j + 1) / static_cast<double>(tensor.grid_size()));
            out << ',';
            write_num(out, sums(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(j)) / scale);
            out << '\n';
        }
    }
}

void write_gamma_surfaces(const ResidualPanel& resid, const StatWindow& win, std::ostream& out) {
    const double tau = win.width / static_cast<double>(win.n);
    out << "t,u,k,entry,value\n";
    for (std::size_t c = win.half; c + win.half <= win.n; ++c) {
        const double t = static_cast<double>(c) / static_cast<double>(win.n);
        for (std::size_t j = 0; j < resid.grid_size(); ++j) {
            const double u = static_cast<double>(j + 1) / static_cast<double>(resid.grid_size());
            for (std::size_t k = 1; k <= win.lags; ++k) {
                const auto g = gamma_hat(resid, k, t, j, tau, win.kernel);
                for (Eigen::Index r = 0; r < g.rows(); ++r) {
                    for (Eigen::Index q = 0; q < g.cols(); ++q) {
                        write_num(out, t);
                        out << ',';
                        write_num(out, u);
                        out << ',' << k << ',' << r * g.cols() + q + 1 << ',';
                        write_num(out, g(r, q));
                        out << '\n';
                    }
                }
            }
        }
    }
}

}  // namespace lswn
