#include "lswn/bootstrap.hpp"

#include "lswn/error.hpp"
#include "lswn/parallel.hpp"
#include "lswn/rng.hpp"
#include "lswn/smoothing.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace lswn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr std::size_t kReplicateBatch = 64;

std::size_t resolve_lags(const TestConfig& cfg, std::size_t n, Provenance& src) {
    src = cfg.s_n ? Provenance::User : Provenance::Rule;
    return cfg.s_n ? *cfg.s_n : rule_lags(n);
}

std::size_t resolve_gap(const TestConfig& cfg, std::size_t n, std::size_t s_n, Provenance& src) {
    src = cfg.M_n ? Provenance::User : Provenance::Rule;
    if (cfg.M_n) return *cfg.M_n;
    return std::max<std::size_t>(1, std::min(rule_gap(n), s_n - 1));
}

/// Checks every user-fixed value that can be checked before any smoothing.
void precheck(const TestConfig& cfg, std::size_t n, std::size_t s_n, std::size_t M_n) {
    if (cfg.b && !(*cfg.b > 0.0 && *cfg.b < 0.5)) {
        throw Error(ErrorCode::ConfigInfeasible, "b=" + std::to_string(*cfg.b) + " must lie in (0, 1/2)");
    }
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error(ErrorCode::ConfigInfeasible, "alpha must lie in (0, 1)");
    if (cfg.B < 100) {
        throw Error(ErrorCode::ConfigInfeasible, "B >= 100 violated (B=" + std::to_string(cfg.B) + ")");
    }
    if (s_n < 2) throw Error(ErrorCode::ConfigInfeasible, "s_n >= 2 violated");
    if (M_n < 1 || M_n >= s_n) {
        throw Error(ErrorCode::ConfigInfeasible,
                    "1 <= M_n < s_n violated (M_n=" + std::to_string(M_n) + ", s_n=" + std::to_string(s_n) + ")");
    }
    if (cfg.tau) {
        const auto win = StatWindow::make(n, *cfg.tau, s_n, M_n, Kernel(cfg.kernel));
        if (cfg.L && (*cfg.L < 2 || *cfg.L >= win.half)) {
            throw Error(ErrorCode::ConfigInfeasible, "2 <= L < ceil(n*tau) violated (L=" + std::to_string(*cfg.L) +
                                                         ", ceil(n*tau)=" + std::to_string(win.half) + ")");
        }
    } else if (cfg.L && *cfg.L < 2) {
        throw Error(ErrorCode::ConfigInfeasible, "L >= 2 violated");
    }
}

}  // namespace

MovingSumTensor::MovingSumTensor(std::size_t block, std::size_t half, std::size_t offsets, std::size_t grid,
                                 std::size_t lags)
    : block_(block), half_(half), offsets_(offsets), grid_(grid), lags_(lags),
      data_(offsets * (2 * half - 2 * block + 1) * grid, 0.0) {}

MovingSumTensor moving_sums(const WindowTensor& tensor, std::size_t L) {
    const auto& win = tensor.window();
    if (L < 1 || L >= win.half) {
        throw Error(ErrorCode::WindowTooLarge, "block length L=" + std::to_string(L) +
                                                   " must satisfy 1 <= L < ceil(n*tau)=" + std::to_string(win.half));
    }
    MovingSumTensor out(L, win.half, tensor.offsets(), tensor.grid_size(), win.lags);
    const double scale = 1.0 / std::sqrt(2.0 * static_cast<double>(win.lags * win.lags) * static_cast<double>(L));
    const std::size_t rows = tensor.rows();
    const std::size_t grid = tensor.grid_size();
    std::vector<double> prefix((rows + 1) * grid);
    for (std::size_t w = 0; w < tensor.offsets(); ++w) {
        // prefix[r] = sum_{r' < r} W[r'][w]
        std::fill(prefix.begin(), prefix.begin() + static_cast<std::ptrdiff_t>(grid), 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t m = 0; m < grid; ++m) {
                prefix[(r + 1) * grid + m] = prefix[r * grid + m] + tensor.at(r, w, m);
            }
        }
        for (std::size_t jj = L; jj <= 2 * win.half - L; ++jj) {
            for (std::size_t m = 0; m < grid; ++m) {
                const double forward = prefix[(jj + L) * grid + m] - prefix[jj * grid + m];
                const double backward = prefix[jj * grid + m] - prefix[(jj - L) * grid + m];
                out.at(jj, w, m) = scale * (forward - backward);
            }
        }
    }
    return out;
}

double bootstrap_draw(const MovingSumTensor& sums, std::span<const double> multipliers) {
    const std::size_t L = sums.block();
    const std::size_t last = 2 * sums.half() - L;
    if (multipliers.size() < sums.offsets() - 1 + last) {
        throw Error(ErrorCode::InvalidArgument, "multipliers do not cover positions up to n - L");
    }
    double best = 0.0;
    std::vector<double> acc(sums.grid_size());
    for (std::size_t w = 0; w < sums.offsets(); ++w) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t jj = L; jj <= last; ++jj) {
            const double r = multipliers[w + jj - 1];
            for (std::size_t m = 0; m < acc.size(); ++m) acc[m] += sums.at(jj, w, m) * r;
        }
        for (double a : acc) best = std::max(best, std::abs(a));
    }
    return best / std::sqrt(static_cast<double>(sums.half() - L));
}

std::vector<double> bootstrap_multipliers(std::uint64_t seed, std::size_t replicate, std::size_t n) {
    const rng::CounterRng gen(seed);
    std::vector<double> out(n);
    for (std::size_t a = 0; a < n; ++a) {
        out[a] = gen.normal(rng::Stream::Multiplier, replicate, static_cast<std::uint32_t>(a + 1));
    }
    return out;
}

std::vector<double> bootstrap_draws(const MovingSumTensor& sums, std::uint64_t seed, std::size_t B,
                                    std::size_t jobs) {
    const std::size_t n = sums.n();
    const std::size_t L = sums.block();
    const auto J = static_cast<Eigen::Index>(sums.positions());
    const auto grid = static_cast<Eigen::Index>(sums.grid_size());
    const double norm = 1.0 / std::sqrt(static_cast<double>(sums.half() - L));
    const rng::CounterRng gen(seed);

    std::vector<double> draws(B, 0.0);
    const std::size_t batches = (B + kReplicateBatch - 1) / kReplicateBatch;
    parallel_for(batches, jobs, [&](std::size_t first_batch, std::size_t last_batch) {
        Eigen::MatrixXd mult;
        Eigen::MatrixXd prod;
        for (std::size_t batch = first_batch; batch < last_batch; ++batch) {
            const std::size_t r0 = batch * kReplicateBatch;
            const auto width = static_cast<Eigen::Index>(std::min(kReplicateBatch, B - r0));
            mult.resize(static_cast<Eigen::Index>(n), width);
            for (Eigen::Index c = 0; c < width; ++c) {
                for (std::size_t a = 0; a < n; ++a) {
                    mult(static_cast<Eigen::Index>(a), c) = gen.normal(
                        rng::Stream::Multiplier, r0 + static_cast<std::size_t>(c), static_cast<std::uint32_t>(a + 1));
                }
            }
            Eigen::VectorXd best = Eigen::VectorXd::Zero(width);
            for (std::size_t w = 0; w < sums.offsets(); ++w) {
                const Eigen::Map<const RowMatrix> block(sums.block_of(w).data(), J, grid);
                // Rows of `mult` are absolute positions a = w + jj, jj = L..2h-L.
                prod.noalias() = block.transpose() * mult.middleRows(static_cast<Eigen::Index>(w + L - 1), J);
                best = best.cwiseMax(prod.cwiseAbs().colwise().maxCoeff().transpose());
            }
            for (Eigen::Index c = 0; c < width; ++c) draws[r0 + static_cast<std::size_t>(c)] = best(c) * norm;
        }
    });
    return draws;
}

double bootstrap_quantile(std::span<const double> draws, double alpha) {
    if (draws.empty()) throw Error(ErrorCode::InvalidArgument, "no bootstrap draws");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    std::vector<double> sorted(draws.begin(), draws.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = (1.0 - alpha) * static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(pos - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

bool TestResult::reject_at(double alpha) const { return q_scaled > bootstrap_quantile(draws, alpha); }

PreparedTest prepare_test_on_residuals(ResidualPanel resid, const TestConfig& cfg, Tuned<double> b) {
    resid.require_testable();
    const std::size_t n = resid.n();
    const Kernel kernel(cfg.kernel);

    ResolvedConfig rc;
    TuningReport tuning;
    rc.b = b;
    rc.B = cfg.B;
    rc.alpha = cfg.alpha;
    rc.kernel = cfg.kernel;
    rc.seed = cfg.seed;
    rc.s_n.value = resolve_lags(cfg, n, rc.s_n.source);
    rc.M_n.value = resolve_gap(cfg, n, rc.s_n.value, rc.M_n.source);
    precheck(cfg, n, rc.s_n.value, rc.M_n.value);

    if (cfg.tau) {
        rc.tau = {*cfg.tau, Provenance::User};
    } else {
        auto choice = gcv_tau(resid, rc.s_n.value, default_tau_grid(n), kernel);
        rc.tau = {choice.tau, Provenance::Gcv};
        tuning.gcv_tau = std::move(choice.curve);
    }
    const auto win = StatWindow::make(n, rc.tau.value, rc.s_n.value, rc.M_n.value, kernel);
    auto tensor = build_window_tensor(resid, win, cfg.jobs);

    if (cfg.L) {
        rc.L = {*cfg.L, Provenance::User};
    } else {
        auto choice = mv_window(tensor, default_L_grid(n, win.half));
        rc.L = {choice.L, Provenance::Mv};
        tuning.mv = std::move(choice.curve);
    }
    validate(rc, n);
    return {rc, std::move(tuning), std::move(resid), std::move(tensor)};
}

PreparedTest prepare_test(const FunctionalPanel& panel, const TestConfig& cfg) {
    panel.require_testable();
    const std::size_t n = panel.n();
    {
        Provenance ignored{};
        const auto s_n = resolve_lags(cfg, n, ignored);
        precheck(cfg, n, s_n, resolve_gap(cfg, n, s_n, ignored));
    }
    const Kernel kernel(cfg.kernel);
    Tuned<double> b;
    std::vector<GcvPoint> gcv_curve;
    if (cfg.b) {
        b = {*cfg.b, Provenance::User};
    } else {
        auto choice = gcv_bandwidth(panel, default_b_grid(n), kernel);
        b = {choice.bandwidth, Provenance::Gcv};
        gcv_curve = std::move(choice.curve);
    }
    const auto mean = estimate_mean(panel, b.value, kernel);
    auto prepared = prepare_test_on_residuals(compute_residuals(panel, mean), cfg, b);
    prepared.tuning.gcv_b = std::move(gcv_curve);
    return prepared;
}

TestResult finish_test(PreparedTest prepared, const TestConfig& cfg) {
    TestResult result;
    result.config = prepared.config;
    result.tuning = std::move(prepared.tuning);
    const auto& rc = result.config;
    result.q_n = q_statistic(prepared.tensor);
    result.q_scaled = result.q_n / std::sqrt(static_cast<double>(rc.s_n.value));
    const auto sums = moving_sums(prepared.tensor, rc.L.value);
    result.draws = bootstrap_draws(sums, rc.seed, rc.B, cfg.jobs);
    result.r_boot = bootstrap_quantile(result.draws, rc.alpha);
    result.reject = result.q_scaled > result.r_boot;
    result.keep_draws = cfg.keep_draws;
    return result;
}

TestResult run_test(const FunctionalPanel& panel, const TestConfig& cfg) {
    return finish_test(prepare_test(panel, cfg), cfg);
}

nlohmann::ordered_json params_to_json(const ResolvedConfig& c) {
    return {{"b", c.b.value},     {"tau", c.tau.value}, {"s_n", c.s_n.value},
            {"M_n", c.M_n.value}, {"L", c.L.value},     {"B", c.B},
            {"seed", c.seed},     {"kernel", std::string(to_string(c.kernel))}};
}

nlohmann::ordered_json provenance_to_json(const ResolvedConfig& c) {
    return {{"b", std::string(to_string(c.b.source))},
            {"tau", std::string(to_string(c.tau.source))},
            {"s_n", std::string(to_string(c.s_n.source))},
            {"M_n", std::string(to_string(c.M_n.source))},
            {"L", std::string(to_string(c.L.source))}};
}

nlohmann::ordered_json to_json(const TestResult& result) {
    nlohmann::ordered_json j;
    j["q_n"] = result.q_n;
    j["q_scaled"] = result.q_scaled;
    j["r_boot"] = result.r_boot;
    j["reject"] = result.reject;
    j["alpha"] = result.config.alpha;
    j["params"] = params_to_json(result.config);
    j["provenance"] = provenance_to_json(result.config);
    j["tuning"] = to_json(result.tuning);
    if (result.keep_draws) j["draws"] = result.draws;
    return j;
}

}  // namespace lswn
