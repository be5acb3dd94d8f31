#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace lswn {

/// Observations X_i(u_j) in R^p on the regular lattice u_j = (j+1)/N.
///
/// Storage is time-major, then grid, then dimension: value (i, j, d) lives at
/// ((i * N) + j) * p + d. All indices in the C++ API are 0-based; rescaled
/// time of row i is (i+1)/n. Files use 1-based indices.
///
/// Construction enforces a non-empty, finite lattice. The testing pipeline
/// additionally needs n >= 8 and N >= 2, see require_testable().
class FunctionalPanel {
public:
    FunctionalPanel() = default;
    FunctionalPanel(std::size_t n, std::size_t grid, std::size_t dim, std::vector<double> values);

    [[nodiscard]] static FunctionalPanel zeros(std::size_t n, std::size_t grid, std::size_t dim);

    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] std::size_t grid_size() const noexcept { return grid_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] bool empty() const noexcept { return values_.empty(); }

    [[nodiscard]] double operator()(std::size_t i, std::size_t j, std::size_t d) const noexcept {
        return values_[(i * grid_ + j) * dim_ + d];
    }
    /// The p-vector X_i(u_j).
    [[nodiscard]] std::span<const double> point(std::size_t i, std::size_t j) const noexcept {
        return {values_.data() + (i * grid_ + j) * dim_, dim_};
    }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

    /// Throws InconsistentShape unless n >= 8 and N >= 2.
    void require_testable() const;

    friend bool operator==(const FunctionalPanel&, const FunctionalPanel&) = default;

private:
    std::size_t n_ = 0;
    std::size_t grid_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> values_;
};

/// Residuals eps_i(u_j) = X_i(u_j) - m(i/n, u_j). Same layout as the panel.
using ResidualPanel = FunctionalPanel;

enum class PanelFormat { LongCsv, Ndjson };

/// Picks NDJSON for .ndjson / .jsonl, long-CSV otherwise.
[[nodiscard]] PanelFormat format_for_path(const std::filesystem::path& path);

[[nodiscard]] FunctionalPanel load_panel(std::istream& in, PanelFormat format);
[[nodiscard]] FunctionalPanel load_panel(const std::filesystem::path& path);

/// Writes shortest round-trip decimals, so load_panel(save_panel(x)) == x bit for bit.
void save_panel(const FunctionalPanel& panel, std::ostream& out, PanelFormat format);
void save_panel(const FunctionalPanel& panel, const std::filesystem::path& path);

}  // namespace lswn
