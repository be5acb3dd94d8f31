#pragma once

#include "lswn/panel.hpp"
#include "lswn/rng.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace lswn::testing {

/// Standard normal panel driven by the library's counter RNG.
inline FunctionalPanel normal_panel(std::size_t n, std::size_t grid, std::size_t dim, std::uint64_t seed) {
    const rng::CounterRng gen(seed);
    std::vector<double> v(n * grid * dim);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = gen.normal(rng::Stream::Innovation, k, 0);
    return {n, grid, dim, std::move(v)};
}

/// The deterministic residual panel used by tests/oracles/oracle.py.
inline FunctionalPanel oracle_panel(std::size_t n, std::size_t grid, std::size_t dim) {
    std::vector<double> v;
    v.reserve(n * grid * dim);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= grid; ++j) {
            for (std::size_t d = 1; d <= dim; ++d) {
                v.push_back(std::sin(1.3 * i + 0.7 * j + 2.1 * d) + 0.25 * std::cos(0.37 * i * d));
            }
        }
    }
    return {n, grid, dim, std::move(v)};
}

inline double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

}  // namespace lswn::testing
