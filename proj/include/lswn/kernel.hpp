#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

namespace lswn {

enum class KernelId { Triangular, Epanechnikov };

[[nodiscard]] std::string_view to_string(KernelId id) noexcept;
/// Throws InvalidArgument for unknown names.
[[nodiscard]] KernelId parse_kernel(std::string_view name);

/// Symmetric density kernel supported on (-1, 1).
class Kernel {
public:
    constexpr explicit Kernel(KernelId id = KernelId::Triangular) noexcept : id_(id) {}

    [[nodiscard]] constexpr KernelId id() const noexcept { return id_; }

    [[nodiscard]] double operator()(double x) const noexcept {
        const double a = std::abs(x);
        if (a >= 1.0) return 0.0;
        switch (id_) {
            case KernelId::Triangular: return 1.0 - a;
            case KernelId::Epanechnikov: return 0.75 * (1.0 - a * a);
        }
        return 0.0;
    }

    /// K(0).
    [[nodiscard]] double peak() const noexcept { return (*this)(0.0); }

private:
    KernelId id_;
};

/// Evaluates K((pos - center) / width) where pos and center are positions on
/// the integer time axis and width = n * bandwidth. Using integer-scale
/// offsets keeps support boundaries exact on lattice points.
struct ScaledKernel {
    Kernel kernel;
    double width;

    [[nodiscard]] double operator()(double offset) const noexcept { return kernel(offset / width); }
};

/// n * bandwidth, snapped to the nearest integer when within 1e-9 of it so
/// that e.g. n = 40, tau = 0.2 gives exactly 8 rather than 8 + ulp.
[[nodiscard]] double scaled_width(std::size_t n, double bandwidth) noexcept;
/// ceil(n * bandwidth) using the snapped width.
[[nodiscard]] std::size_t scaled_ceil(std::size_t n, double bandwidth) noexcept;

}  // namespace lswn
