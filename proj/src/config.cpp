#include "lswn/config.hpp"

#include "lswn/error.hpp"

#include <cmath>
#include <string>

namespace lswn {

std::string_view to_string(Provenance p) noexcept {
    switch (p) {
        case Provenance::User: return "user";
        case Provenance::Rule: return "rule";
        case Provenance::Gcv: return "gcv";
        case Provenance::Mv: return "mv";
    }
    return "unknown";
}

StatWindow StatWindow::make(std::size_t n, double tau, std::size_t s_n, std::size_t M_n, Kernel kernel) {
    // tau >= 1/2 is caught below as 2*ceil(n*tau) >= n, which names the real obstruction.
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw Error(ErrorCode::ConfigInfeasible, "tau=" + std::to_string(tau) + " must lie in (0, 1/2)");
    }
    StatWindow w;
    w.n = n;
    w.width = scaled_width(n, tau);
    w.half = scaled_ceil(n, tau);
    w.lags = s_n;
    w.gap = M_n;
    w.kernel = kernel;
    const std::string shape = " (n=" + std::to_string(n) + ", ceil(n*tau)=" + std::to_string(w.half) +
                              ", s_n=" + std::to_string(s_n) + ", M_n=" + std::to_string(M_n) + ")";
    if (2 * w.half >= n) {
        throw Error(ErrorCode::ConfigInfeasible, "2*ceil(n*tau) < n violated: no window centre exists for tau=" +
                                                     std::to_string(tau) + shape);
    }
    if (s_n < 2) throw Error(ErrorCode::ConfigInfeasible, "s_n >= 2 violated" + shape);
    if (M_n < 1 || M_n >= s_n) throw Error(ErrorCode::ConfigInfeasible, "1 <= M_n < s_n violated" + shape);
    if (s_n + 1 >= w.half) {
        throw Error(ErrorCode::ConfigInfeasible, "s_n + 1 < ceil(n*tau) violated" + shape);
    }
    return w;
}

void validate(const ResolvedConfig& cfg, std::size_t n) {
    if (!(cfg.b.value > 0.0 && cfg.b.value < 0.5)) {
        throw Error(ErrorCode::ConfigInfeasible, "b=" + std::to_string(cfg.b.value) + " must lie in (0, 1/2)");
    }
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
        throw Error(ErrorCode::ConfigInfeasible, "alpha must lie in (0, 1)");
    }
    if (cfg.B < 100) throw Error(ErrorCode::ConfigInfeasible, "B >= 100 violated (B=" + std::to_string(cfg.B) + ")");
    const auto w = StatWindow::make(n, cfg.tau.value, cfg.s_n.value, cfg.M_n.value, Kernel(cfg.kernel));
    if (cfg.L.value < 2 || cfg.L.value >= w.half) {
        throw Error(ErrorCode::ConfigInfeasible, "2 <= L < ceil(n*tau) violated (L=" + std::to_string(cfg.L.value) +
                                                     ", ceil(n*tau)=" + std::to_string(w.half) + ")");
    }
}

}  // namespace lswn
