#include "lswn/kernel.hpp"

#include "lswn/error.hpp"

namespace lswn {

std::string_view to_string(KernelId id) noexcept {
    return id == KernelId::Triangular ? "triangular" : "epanechnikov";
}

KernelId parse_kernel(std::string_view name) {
    if (name == "triangular") return KernelId::Triangular;
    if (name == "epanechnikov") return KernelId::Epanechnikov;
    throw Error(ErrorCode::InvalidArgument,
                "unknown kernel '" + std::string(name) + "' (expected triangular|epanechnikov)");
}

double scaled_width(std::size_t n, double bandwidth) noexcept {
    const double w = static_cast<double>(n) * bandwidth;
    const double r = std::round(w);
    return std::abs(w - r) < 1e-9 ? r : w;
}

std::size_t scaled_ceil(std::size_t n, double bandwidth) noexcept {
    return static_cast<std::size_t>(std::ceil(scaled_width(n, bandwidth)));
}

}  // namespace lswn
