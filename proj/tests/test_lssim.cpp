#include "lswn/error.hpp"
#include "lswn/lssim.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace lswn;
using sim::Hypothesis;
using sim::SimSpec;

namespace {

double trend(double t, double u) { return (1.0 + u) * (10.0 * std::sin(std::numbers::pi * (t - 0.5)) + 1.0); }

}  // namespace

TEST_CASE("generation is deterministic") {
    for (int model : {1, 2, 3}) {
        SimSpec spec;
        spec.model = model;
        spec.n = 60;
        spec.N = 8;
        spec.seed = 5;
        spec.hypothesis = Hypothesis::Alternative;
        spec.delta = 0.4;
        const auto a = sim::generate(spec);
        CHECK(a == sim::generate(spec));
        CHECK(a.n() == 60);
        CHECK(a.grid_size() == 8);
        CHECK(a.dim() == 5);
        spec.seed = 6;
        CHECK_FALSE(a == sim::generate(spec));
    }
}

TEST_CASE("model 1 alternative leaves the centre curve untouched") {
    SimSpec spec;
    spec.seed = 3;
    const auto null = sim::generate(spec);
    spec.hypothesis = Hypothesis::Alternative;
    spec.delta = 0.4;
    const auto alt = sim::generate(spec);
    const std::size_t centre = 24;  // u = 25/50
    std::size_t differing = 0;
    for (std::size_t i = 0; i < spec.n; ++i) {
        for (std::size_t d = 0; d < spec.p; ++d) {
            CHECK(alt(i, centre, d) == null(i, centre, d));
            differing += alt(i, 0, d) != null(i, 0, d);
        }
    }
    CHECK(differing > 0);
}

TEST_CASE("zero delta alternatives equal the null") {
    for (int model : {1, 2, 3}) {
        SimSpec spec;
        spec.model = model;
        spec.n = 80;
        spec.N = 10;
        spec.seed = 9;
        const auto null = sim::generate(spec);
        spec.hypothesis = Hypothesis::Alternative;
        CHECK(sim::generate(spec) == null);
    }
}

TEST_CASE("model 1 null innovations are serially uncorrelated") {
    const std::size_t n = 400;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SimSpec spec;
        spec.n = n;
        spec.N = 10;
        spec.seed = seed;
        const auto x = sim::generate(spec);
        double acf = 0.0;
        for (std::size_t j = 0; j < spec.N; ++j) {
            const double u = (j + 1.0) / spec.N;
            for (std::size_t d = 0; d < spec.p; ++d) {
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double e = x(i, j, d) - trend((i + 1.0) / n, u);
                    den += e * e;
                    if (i > 0) num += e * (x(i - 1, j, d) - trend(static_cast<double>(i) / n, u));
                }
                acf += num / den;
            }
        }
        acf /= static_cast<double>(spec.N * spec.p);
        CHECK(std::abs(acf) < 4.0 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("operator normalizer") {
    // Frozen from tests/oracles/oracle.py.
    CHECK(sim::operator_normalizer(50) == doctest::Approx(0.72534090406801333).epsilon(1e-14));
    CHECK(sim::operator_normalizer(10) == doctest::Approx(0.69796887278509734).epsilon(1e-14));
}

TEST_CASE("invalid simulation settings are rejected") {
    SimSpec spec;
    spec.model = 4;
    CHECK_THROWS_AS(sim::validate(spec), Error);
    spec.model = 1;
    spec.delta = -0.1;
    CHECK_THROWS_AS(sim::validate(spec), Error);
    CHECK(sim::parse_hypothesis("alt") == Hypothesis::Alternative);
    CHECK(sim::parse_hypothesis("null") == Hypothesis::Null);
}

TEST_CASE("monte carlo rows") {
    sim::McRow row{1, 200, 5, 0.0, 0.05, 100, 5};
    CHECK(row.rate() == doctest::Approx(0.05));
    CHECK(row.se() == doctest::Approx(std::sqrt(0.05 * 0.95 / 100)));

    TestConfig cfg;
    cfg.B = 100;
    sim::McOptions opt;
    opt.reps = 49;
    CHECK_THROWS_AS((void)sim::monte_carlo({SimSpec{}}, cfg, opt), Error);

    SimSpec null;
    null.n = 80;
    null.p = 2;
    null.N = 6;
    SimSpec alt = null;
    alt.hypothesis = Hypothesis::Alternative;
    opt.reps = 50;
    opt.alphas = {0.05, 0.10};
    std::size_t checkpoints = 0;
    opt.checkpoint = [&](const sim::McReport&) { ++checkpoints; };
    const auto report = sim::monte_carlo({null, alt}, cfg, opt);
    REQUIRE(report.rows.size() == 4);
    CHECK(report.complete);
    CHECK(checkpoints > 0);
    CHECK(report.rows[0].rejections == report.rows[2].rejections);
    CHECK(report.rows[1].rejections == report.rows[3].rejections);
    CHECK(report.rows[0].rejections <= report.rows[1].rejections);
    std::ostringstream csv;
    sim::write_report_csv(report, csv);
    const std::string text = csv.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}
