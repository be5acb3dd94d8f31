#include "lswn/bootstrap.hpp"
#include "lswn/error.hpp"
#include "lswn/lssim.hpp"
#include "lswn/smoothing.hpp"
#include "lswn/tuning.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

namespace py = pybind11;
using namespace lswn;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

FunctionalPanel to_panel(const Array& values) {
    if (values.ndim() != 3) throw Error(ErrorCode::InconsistentShape, "expected an array of shape (n, N, p)");
    const auto n = static_cast<std::size_t>(values.shape(0));
    const auto grid = static_cast<std::size_t>(values.shape(1));
    const auto dim = static_cast<std::size_t>(values.shape(2));
    return {n, grid, dim, std::vector<double>(values.data(), values.data() + values.size())};
}

Array to_array(const FunctionalPanel& panel) {
    Array out({panel.n(), panel.grid_size(), panel.dim()});
    std::copy(panel.values().begin(), panel.values().end(), out.mutable_data());
    return out;
}

TestConfig make_config(std::optional<double> b, std::optional<double> tau, std::optional<std::size_t> s_n,
                       std::optional<std::size_t> M_n, std::optional<std::size_t> L, std::size_t B, double alpha,
                       const std::string& kernel, std::uint64_t seed, std::size_t jobs, bool keep_draws) {
    TestConfig cfg;
    cfg.b = b;
    cfg.tau = tau;
    cfg.s_n = s_n;
    cfg.M_n = M_n;
    cfg.L = L;
    cfg.B = B;
    cfg.alpha = alpha;
    cfg.kernel = parse_kernel(kernel);
    cfg.seed = seed;
    cfg.jobs = jobs;
    cfg.keep_draws = keep_draws;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_lswn, m) {
    m.doc() = "White-noise test for multivariate locally stationary functional time series";

    py::register_exception<Error>(m, "LswnError", PyExc_ValueError);

    m.def(
        "run_test",
        [](const Array& values, std::optional<double> b, std::optional<double> tau, std::optional<std::size_t> s_n,
           std::optional<std::size_t> M_n, std::optional<std::size_t> L, std::size_t B, double alpha,
           const std::string& kernel, std::uint64_t seed, std::size_t jobs, bool keep_draws) {
            const auto panel = to_panel(values);
            const auto cfg = make_config(b, tau, s_n, M_n, L, B, alpha, kernel, seed, jobs, keep_draws);
            std::string text;
            {
                py::gil_scoped_release release;
                text = to_json(run_test(panel, cfg)).dump();
            }
            return text;
        },
        py::arg("values"), py::kw_only(), py::arg("b") = py::none(), py::arg("tau") = py::none(),
        py::arg("s_n") = py::none(), py::arg("M_n") = py::none(), py::arg("L") = py::none(), py::arg("B") = 1000,
        py::arg("alpha") = 0.05, py::arg("kernel") = "triangular", py::arg("seed") = 0, py::arg("jobs") = 1,
        py::arg("keep_draws") = false, "Run the test; returns the result as a JSON string.");

    m.def(
        "simulate",
        [](int model, std::size_t n, std::size_t p, std::size_t N, const std::string& hypothesis, double delta,
           std::uint64_t seed, std::size_t burn_in) {
            sim::SimSpec spec{model, sim::parse_hypothesis(hypothesis), n, p, N, delta, seed, burn_in};
            return to_array(sim::generate(spec));
        },
        py::kw_only(), py::arg("model") = 1, py::arg("n") = 200, py::arg("p") = 5, py::arg("N") = 50,
        py::arg("hypothesis") = "null", py::arg("delta") = 0.0, py::arg("seed") = 0, py::arg("burn_in") = 200);

    m.def(
        "estimate_mean",
        [](const Array& values, double b, const std::string& kernel) {
            return to_array(estimate_mean(to_panel(values), b, Kernel{parse_kernel(kernel)}).values);
        },
        py::arg("values"), py::arg("b"), py::arg("kernel") = "triangular");

    m.def(
        "gcv_bandwidth",
        [](const Array& values, std::optional<std::vector<double>> grid, const std::string& kernel) {
            const auto panel = to_panel(values);
            const auto candidates = grid ? *grid : default_b_grid(panel.n());
            const auto choice = gcv_bandwidth(panel, candidates, Kernel{parse_kernel(kernel)});
            std::vector<std::tuple<double, double, double>> curve;
            for (const auto& pt : choice.curve) curve.emplace_back(pt.bandwidth, pt.score, pt.trace);
            return py::make_tuple(choice.bandwidth, curve);
        },
        py::arg("values"), py::arg("grid") = py::none(), py::arg("kernel") = "triangular",
        "Returns (b, [(b, score, trace), ...]).");

    m.def(
        "q_statistic",
        [](const Array& residuals, double tau, std::size_t s_n, std::size_t M_n, const std::string& kernel) {
            const auto resid = to_panel(residuals);
            const auto win = StatWindow::make(resid.n(), tau, s_n, M_n, Kernel{parse_kernel(kernel)});
            return q_statistic(build_window_tensor(resid, win));
        },
        py::arg("residuals"), py::arg("tau"), py::arg("s_n"), py::arg("M_n"), py::arg("kernel") = "triangular");

    m.def(
        "g_sum_oracle",
        [](const Array& residuals, double t, std::size_t j, double tau, std::size_t s_n, std::size_t M_n) {
            const auto resid = to_panel(residuals);
            const auto win = StatWindow::make(resid.n(), tau, s_n, M_n, Kernel{});
            return g_sum_oracle(resid, t, j, win);
        },
        py::arg("residuals"), py::arg("t"), py::arg("j"), py::arg("tau"), py::arg("s_n"), py::arg("M_n"));

    m.def("rule_lags", &rule_lags, py::arg("n"));
    m.def("rule_gap", &rule_gap, py::arg("n"));
    m.def(
        "load_panel", [](const std::string& path) { return to_array(load_panel(std::filesystem::path(path))); },
        py::arg("path"));
    m.def(
        "save_panel",
        [](const Array& values, const std::string& path) { save_panel(to_panel(values), std::filesystem::path(path)); },
        py::arg("values"), py::arg("path"));
}
