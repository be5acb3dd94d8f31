#include "lswn/panel.hpp"

#include "lswn/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace lswn {

namespace {

std::string line_msg(std::size_t line_no, std::string_view what) {
    return "line " + std::to_string(line_no) + ": " + std::string(what);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(',', start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::optional<std::size_t> parse_index(std::string_view s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || v == 0) return std::nullopt;
    return v;
}

void write_double(std::ostream& out, double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.write(buf.data(), ptr - buf.data());
}

struct Cell {
    std::size_t i, j, d;
    double value;
    std::size_t line;
};

FunctionalPanel assemble(const std::vector<Cell>& cells) {
    if (cells.empty()) throw Error(ErrorCode::InconsistentShape, "no data records");
    std::size_t n = 0, grid = 0, dim = 0;
    for (const auto& c : cells) {
        n = std::max(n, c.i);
        grid = std::max(grid, c.j);
        dim = std::max(dim, c.d);
    }
    const std::size_t total = n * grid * dim;
    std::vector<double> values(total, 0.0);
    std::vector<char> seen(total, 0);
    for (const auto& c : cells) {
        const std::size_t at = ((c.i - 1) * grid + (c.j - 1)) * dim + (c.d - 1);
        if (seen[at]) {
            throw Error(ErrorCode::MalformedRecord,
                        line_msg(c.line, "duplicate cell (" + std::to_string(c.i) + "," +
                                             std::to_string(c.j) + "," + std::to_string(c.d) + ")"));
        }
        seen[at] = 1;
        values[at] = c.value;
    }
    if (cells.size() != total) {
        const auto missing = std::find(seen.begin(), seen.end(), 0) - seen.begin();
        const auto mi = static_cast<std::size_t>(missing) / (grid * dim) + 1;
        const auto mj = static_cast<std::size_t>(missing) / dim % grid + 1;
        const auto md = static_cast<std::size_t>(missing) % dim + 1;
        throw Error(ErrorCode::InconsistentShape,
                    "expected " + std::to_string(total) + " cells for n=" + std::to_string(n) +
                        ", N=" + std::to_string(grid) + ", p=" + std::to_string(dim) + ", got " +
                        std::to_string(cells.size()) + "; first missing (" + std::to_string(mi) +
                        "," + std::to_string(mj) + "," + std::to_string(md) + ")");
    }
    return FunctionalPanel(n, grid, dim, std::move(values));
}

FunctionalPanel load_long_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::array<std::size_t, 4>> cols;  // time, grid, dim, value
    std::optional<std::size_t> u_col;
    std::size_t ncols = 0;
    std::vector<Cell> cells;
    // u columns are only validated after N is known.
    std::vector<std::pair<std::size_t, double>> u_checks;

    while (std::getline(in, line)) {
        ++line_no;
        const auto view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        const auto fields = split_commas(view);
        if (!cols) {
            std::array<std::optional<std::size_t>, 4> found;
            constexpr std::array<std::string_view, 4> names{"time", "grid", "dim", "value"};
            for (std::size_t c = 0; c < fields.size(); ++c) {
                for (std::size_t k = 0; k < names.size(); ++k) {
                    if (fields[c] == names[k]) found[k] = c;
                }
                if (fields[c] == "u") u_col = c;
            }
            for (std::size_t k = 0; k < names.size(); ++k) {
                if (!found[k]) {
                    throw Error(ErrorCode::MalformedRecord,
                                line_msg(line_no, "header lacks column '" + std::string(names[k]) +
                                                      "' (expected time,grid,dim,value)"));
                }
            }
            cols = std::array<std::size_t, 4>{*found[0], *found[1], *found[2], *found[3]};
            ncols = fields.size();
            continue;
        }
        if (fields.size() != ncols) {
            throw Error(ErrorCode::MalformedRecord,
                        line_msg(line_no, "expected " + std::to_string(ncols) + " fields, got " +
                                              std::to_string(fields.size())));
        }
        const auto i = parse_index(fields[(*cols)[0]]);
        const auto j = parse_index(fields[(*cols)[1]]);
        const auto d = parse_index(fields[(*cols)[2]]);
        const auto v = parse_double(fields[(*cols)[3]]);
        if (!i || !j || !d) {
            throw Error(ErrorCode::MalformedRecord, line_msg(line_no, "indices must be integers >= 1"));
        }
        if (!v) throw Error(ErrorCode::MalformedRecord, line_msg(line_no, "unparseable value"));
        if (!std::isfinite(*v)) throw Error(ErrorCode::NonFiniteValue, line_msg(line_no, "value is not finite"));
        if (u_col) {
            const auto u = parse_double(fields[*u_col]);
            if (!u) throw Error(ErrorCode::MalformedRecord, line_msg(line_no, "unparseable u"));
            u_checks.emplace_back(line_no, *u);
        }
        cells.push_back({*i, *j, *d, *v, line_no});
    }
    if (!cols) throw Error(ErrorCode::MalformedRecord, "missing header time,grid,dim,value");
    auto panel = assemble(cells);
    for (std::size_t k = 0; k < u_checks.size(); ++k) {
        const double expected = static_cast<double>(cells[k].j) / static_cast<double>(panel.grid_size());
        if (std::abs(u_checks[k].second - expected) > 1e-12) {
            throw Error(ErrorCode::MalformedRecord,
                        line_msg(u_checks[k].first, "u does not match j/N (irregular grids are not supported)"));
        }
    }
    return panel;
}

FunctionalPanel load_ndjson(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<Cell> cells;
    std::optional<std::size_t> grid, dim;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedRecord, line_msg(line_no, e.what()));
        }
        if (!rec.is_object() || !rec.contains("i") || !rec.contains("curves") ||
            !rec["i"].is_number_unsigned() || !rec["curves"].is_array()) {
            throw Error(ErrorCode::MalformedRecord,
                        line_msg(line_no, "expected {\"i\": <int>=1>, \"curves\": [[...], ...]}"));
        }
        const auto i = rec["i"].get<std::size_t>();
        if (i == 0) throw Error(ErrorCode::MalformedRecord, line_msg(line_no, "i must be >= 1"));
        const auto& curves = rec["curves"];
        if (!grid) grid = curves.size();
        if (curves.size() != *grid || *grid == 0) {
            throw Error(ErrorCode::InconsistentShape, line_msg(line_no, "curve count differs from first record"));
        }
        for (std::size_t j = 0; j < curves.size(); ++j) {
            const auto& pt = curves[j];
            if (!pt.is_array()) throw Error(ErrorCode::MalformedRecord, line_msg(line_no, "grid entry is not an array"));
            if (!dim) dim = pt.size();
            if (pt.size() != *dim || *dim == 0) {
                throw Error(ErrorCode::InconsistentShape, line_msg(line_no, "dimension differs from first record"));
            }
            for (std::size_t d = 0; d < pt.size(); ++d) {
                if (!pt[d].is_number()) throw Error(ErrorCode::MalformedRecord, line_msg(line_no, "non-numeric value"));
                const double v = pt[d].get<double>();
                if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, line_msg(line_no, "value is not finite"));
                cells.push_back({i, j + 1, d + 1, v, line_no});
            }
        }
    }
    return assemble(cells);
}

}  // namespace

FunctionalPanel::FunctionalPanel(std::size_t n, std::size_t grid, std::size_t dim, std::vector<double> values)
    : n_(n), grid_(grid), dim_(dim), values_(std::move(values)) {
    if (n_ == 0 || grid_ == 0 || dim_ == 0) {
        throw Error(ErrorCode::InconsistentShape, "panel must have n, N, p >= 1");
    }
    if (values_.size() != n_ * grid_ * dim_) {
        throw Error(ErrorCode::InconsistentShape,
                    "value count " + std::to_string(values_.size()) + " != n*N*p = " +
                        std::to_string(n_ * grid_ * dim_));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "panel contains a non-finite value");
    }
}

FunctionalPanel FunctionalPanel::zeros(std::size_t n, std::size_t grid, std::size_t dim) {
    return FunctionalPanel(n, grid, dim, std::vector<double>(n * grid * dim, 0.0));
}

void FunctionalPanel::require_testable() const {
    if (n_ < 8 || grid_ < 2) {
        throw Error(ErrorCode::InconsistentShape,
                    "testing needs n >= 8 and N >= 2 (got n=" + std::to_string(n_) +
                        ", N=" + std::to_string(grid_) + ")");
    }
}

PanelFormat format_for_path(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    return (ext == ".ndjson" || ext == ".jsonl") ? PanelFormat::Ndjson : PanelFormat::LongCsv;
}

FunctionalPanel load_panel(std::istream& in, PanelFormat format) {
    return format == PanelFormat::Ndjson ? load_ndjson(in) : load_long_csv(in);
}

FunctionalPanel load_panel(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return load_panel(in, format_for_path(path));
}

void save_panel(const FunctionalPanel& panel, std::ostream& out, PanelFormat format) {
    if (panel.empty()) throw Error(ErrorCode::InconsistentShape, "refusing to write an empty panel");
    if (format == PanelFormat::LongCsv) {
        out << "time,grid,dim,value\n";
        for (std::size_t i = 0; i < panel.n(); ++i) {
            for (std::size_t j = 0; j < panel.grid_size(); ++j) {
                for (std::size_t d = 0; d < panel.dim(); ++d) {
                    out << i + 1 << ',' << j + 1 << ',' << d + 1 << ',';
                    write_double(out, panel(i, j, d));
                    out << '\n';
                }
            }
        }
    } else {
        for (std::size_t i = 0; i < panel.n(); ++i) {
            out << "{\"i\":" << i + 1 << ",\"curves\":[";
            for (std::size_t j = 0; j < panel.grid_size(); ++j) {
                out << (j ? ",[" : "[");
                for (std::size_t d = 0; d < panel.dim(); ++d) {
                    if (d) out << ',';
                    write_double(out, panel(i, j, d));
                }
                out << ']';
            }
            out << "]}\n";
        }
    }
    if (!out) throw Error(ErrorCode::Io, "write failed");
}

void save_panel(const FunctionalPanel& panel, const std::filesystem::path& path) {
    if (panel.empty()) throw Error(ErrorCode::InconsistentShape, "refusing to write an empty panel");
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    save_panel(panel, out, format_for_path(path));
}

}  // namespace lswn
