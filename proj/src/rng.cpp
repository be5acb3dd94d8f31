#include "lswn/rng.hpp"

#include <cmath>
#include <numbers>

namespace lswn::rng {

double CounterRng::normal(Stream stream, std::uint64_t a, std::uint32_t b) const noexcept {
    const auto r = raw(stream, a, b);
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_open_unit(r[2], r[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return CounterRng(master).bits64(Stream::Replicate, index, 0);
}

}  // namespace lswn::rng
