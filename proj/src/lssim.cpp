#include "lswn/lssim.hpp"

#include "lswn/error.hpp"
#include "lswn/parallel.hpp"
#include "lswn/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

namespace lswn::sim {

namespace {

using std::numbers::pi;

double trend(double t, double u) { return (1.0 + u) * (10.0 * std::sin(pi * (t - 0.5)) + 1.0); }
double model1_scale(double u) { return 0.1 * (u - 0.5) * (u - 0.5) + 0.8; }
double a1(double u) { return 0.1 * std::cos(pi * u / 3.0) + 0.5; }
double a2(double u) { return 0.4 * u; }
double sigma_model2(double t) { return 0.5 + 0.5 * std::sin(pi * t); }
double garch_intercept(double t) { return 0.9 + 0.1 * std::cos(pi / 3.0 + 2.0 * pi * t); }
double garch_coef(double t) { return 0.1 + 0.2 * t; }

/// Innovation-driven errors eps_i(u_j) for times 0..n (row 0 seeds the AR
/// alternatives). Layout [(i * N + j) * p + d].
std::vector<double> null_errors(const SimSpec& s, const rng::CounterRng& gen) {
    const std::size_t n = s.n, N = s.N, p = s.p;
    const double nd = static_cast<double>(n);
    auto eta = [&](std::int64_t i, std::size_t d) {
        return gen.normal(rng::Stream::Innovation, static_cast<std::uint64_t>(i), static_cast<std::uint32_t>(d));
    };
    std::vector<bool> first_shape(p);
    for (std::size_t d = 0; d < p; ++d) first_shape[d] = gen.uniform(rng::Stream::Assignment, d, 0) < 0.5;
    auto shape = [&](std::size_t d, double u) { return first_shape[d] ? a1(u) : a2(u); };

    std::vector<double> eps((n + 1) * N * p);
    // Per-coordinate volatility at times 0..n.
    std::vector<double> vol((n + 1) * p, 1.0);
    if (s.model == 2) {
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t d = 0; d < p; ++d) vol[i * p + d] = sigma_model2(static_cast<double>(i) / nd);
        }
    } else if (s.model == 3) {
        const double t0 = 1.0 / nd;
        const auto burn = static_cast<std::int64_t>(s.burn_in);
        for (std::size_t d = 0; d < p; ++d) {
            double var = garch_intercept(t0);
            double prev_eta = eta(-burn, d);
            for (std::int64_t i = -burn + 1; i <= static_cast<std::int64_t>(n); ++i) {
                const double t = i >= 1 ? static_cast<double>(i) / nd : t0;
                const double c = garch_coef(t);
                var = garch_intercept(t) + c * var * prev_eta * prev_eta + c * var;
                prev_eta = eta(i, d);
                if (i >= 0) vol[static_cast<std::size_t>(i) * p + d] = std::sqrt(var);
            }
        }
    }
    for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t d = 0; d < p; ++d) {
            const double e = eta(static_cast<std::int64_t>(i), d);
            const double v = vol[i * p + d];
            for (std::size_t j = 0; j < N; ++j) {
                const double u = static_cast<double>(j + 1) / static_cast<double>(N);
                const double sc = s.model == 1 ? model1_scale(u) : shape(d, u);
                eps[(i * N + j) * p + d] = sc * v * e;
            }
        }
    }
    return eps;
}

void add_ar_alternative(const SimSpec& s, std::vector<double>& eps) {
    const std::size_t n = s.n, N = s.N, p = s.p;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    for (Eigen::Index d = 0; d < a.rows(); ++d) {
        a(d, d) = s.delta;
        if (d > 0) a(d, d - 1) = a(d - 1, d) = 0.1;
    }
    Eigen::VectorXd prev(static_cast<Eigen::Index>(p));
    for (std::size_t i = 1; i <= n; ++i) {
        const double time_factor = 6.0 * std::sin(pi * static_cast<double>(i) / (2.0 * static_cast<double>(n)));
        for (std::size_t j = 0; j < N; ++j) {
            const double u = static_cast<double>(j + 1) / static_cast<double>(N);
            const double coef = time_factor * (u - 0.5) * (u - 0.5);
            for (std::size_t d = 0; d < p; ++d) prev(static_cast<Eigen::Index>(d)) = eps[((i - 1) * N + j) * p + d];
            const Eigen::VectorXd carry = coef * (a * prev);
            for (std::size_t d = 0; d < p; ++d) eps[(i * N + j) * p + d] += carry(static_cast<Eigen::Index>(d));
        }
    }
}

void add_operator_alternative(const SimSpec& s, std::vector<double>& eps) {
    const std::size_t n = s.n, N = s.N, p = s.p;
    const double c = operator_normalizer(N);
    std::vector<double> decay(N);
    for (std::size_t j = 0; j < N; ++j) {
        const double u = static_cast<double>(j + 1) / static_cast<double>(N);
        decay[j] = std::exp(-u * u / 2.0);
    }
    // exp(-(u^2 + s^2)/2) factorizes, so the integral is decay(s) * mean_j decay(u_j) eps(u_j).
    for (std::size_t i = 1; i <= n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n);
        const double a2t = s.delta * (1.0 + 0.25 * std::cos(pi * t / 2.0)) / c;
        for (std::size_t d = 0; d < p; ++d) {
            double integral = 0.0;
            for (std::size_t j = 0; j < N; ++j) integral += decay[j] * eps[((i - 1) * N + j) * p + d];
            integral /= static_cast<double>(N);
            for (std::size_t j = 0; j < N; ++j) eps[(i * N + j) * p + d] += a2t * decay[j] * integral;
        }
    }
}

}  // namespace

std::string_view to_string(Hypothesis h) noexcept { return h == Hypothesis::Null ? "null" : "alt"; }

Hypothesis parse_hypothesis(std::string_view s) {
    if (s == "null") return Hypothesis::Null;
    if (s == "alt" || s == "alternative") return Hypothesis::Alternative;
    throw Error(ErrorCode::InvalidArgument, "hypothesis must be null|alt, got '" + std::string(s) + "'");
}

double operator_normalizer(std::size_t N) {
    double s = 0.0;
    for (std::size_t j = 1; j <= N; ++j) {
        const double u = static_cast<double>(j) / static_cast<double>(N);
        s += std::exp(-u * u / 2.0);
    }
    s /= static_cast<double>(N);
    return s * s;
}

void validate(const SimSpec& spec) {
    if (spec.model < 1 || spec.model > 3) throw Error(ErrorCode::InvalidArgument, "model must be 1, 2 or 3");
    if (spec.n < 8 || spec.p < 1 || spec.N < 2) {
        throw Error(ErrorCode::InvalidArgument, "simulation needs n >= 8, p >= 1, N >= 2");
    }
    if (!(spec.delta >= 0.0) || !std::isfinite(spec.delta)) {
        throw Error(ErrorCode::InvalidArgument, "delta must be finite and >= 0");
    }
}

FunctionalPanel generate(const SimSpec& spec) {
    validate(spec);
    const rng::CounterRng gen(spec.seed);
    auto eps = null_errors(spec, gen);
    if (spec.hypothesis == Hypothesis::Alternative && spec.delta != 0.0) {
        if (spec.model == 3) {
            add_operator_alternative(spec, eps);
        } else {
            add_ar_alternative(spec, eps);
        }
    }
    const std::size_t n = spec.n, N = spec.N, p = spec.p;
    std::vector<double> values(n * N * p);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i + 1) / static_cast<double>(n);
        for (std::size_t j = 0; j < N; ++j) {
            const double m = trend(t, static_cast<double>(j + 1) / static_cast<double>(N));
            for (std::size_t d = 0; d < p; ++d) values[(i * N + j) * p + d] = m + eps[((i + 1) * N + j) * p + d];
        }
    }
    return FunctionalPanel(n, N, p, std::move(values));
}

double McRow::se() const noexcept {
    if (reps == 0) return 0.0;
    const double f = rate();
    return std::sqrt(f * (1.0 - f) / static_cast<double>(reps));
}

McReport monte_carlo(const std::vector<SimSpec>& cells, const TestConfig& cfg, const McOptions& options) {
    if (options.reps < 50) throw Error(ErrorCode::InvalidArgument, "Monte Carlo needs reps >= 50");
    if (options.alphas.empty()) throw Error(ErrorCode::InvalidArgument, "no alpha levels");
    for (const auto& c : cells) validate(c);

    McReport report;
    for (const auto& c : cells) {
        for (double a : options.alphas) report.rows.push_back({c.model, c.n, c.p, c.delta, a, 0, 0});
    }
    const std::size_t levels = options.alphas.size();
    const std::size_t chunk = std::max<std::size_t>(10, 4 * options.jobs);

    for (std::size_t cell = 0; cell < cells.size(); ++cell) {
        std::size_t done = 0;
        while (done < options.reps) {
            if (options.stop && options.stop->load()) {
                report.complete = false;
                return report;
            }
            const std::size_t count = std::min(chunk, options.reps - done);
            std::vector<char> decisions(count * levels, 0);
            parallel_for(count, options.jobs, [&](std::size_t begin, std::size_t end) {
                for (std::size_t k = begin; k < end; ++k) {
                    const std::size_t rep = done + k;
                    SimSpec spec = cells[cell];
                    spec.seed = rng::derive_seed(options.seed, 2 * rep);
                    TestConfig test_cfg = cfg;
                    test_cfg.seed = rng::derive_seed(options.seed, 2 * rep + 1);
                    test_cfg.jobs = 1;
                    test_cfg.keep_draws = false;
                    const auto result = run_test(generate(spec), test_cfg);
                    for (std::size_t a = 0; a < levels; ++a) {
                        decisions[k * levels + a] = result.reject_at(options.alphas[a]) ? 1 : 0;
                    }
                }
            });
            for (std::size_t k = 0; k < count; ++k) {
                for (std::size_t a = 0; a < levels; ++a) {
                    auto& row = report.rows[cell * levels + a];
                    ++row.reps;
                    row.rejections += static_cast<std::size_t>(decisions[k * levels + a]);
                }
            }
            done += count;
            if (options.checkpoint) options.checkpoint(report);
        }
    }
    return report;
}

void write_report_csv(const McReport& report, std::ostream& out) {
    out << "model,n,p,delta,alpha,reps,reject_rate,se\n";
    for (const auto& r : report.rows) {
        out << r.model << ',' << r.n << ',' << r.p << ',' << r.delta << ',' << r.alpha << ',' << r.reps << ','
            << r.rate() << ',' << r.se() << '\n';
    }
}

}  // namespace lswn::sim
