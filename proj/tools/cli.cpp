#include "cli.hpp"

#include "lswn/bootstrap.hpp"
#include "lswn/covstat.hpp"
#include "lswn/error.hpp"
#include "lswn/lssim.hpp"
#include "lswn/panel.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <atomic>
#include <charconv>
#include <cmath>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace lswn::cli {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop.store(true); }

// Reads a JSON object of the form {"test": {"boot": 500, ...}, "mc": {...}}.
// Top-level scalars apply to the main app; sections apply to subcommands.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        ojson doc;
        try {
            doc = ojson::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
        }
        if (!doc.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
        std::vector<CLI::ConfigItem> items;
        for (const auto& [key, value] : doc.items()) {
            if (value.is_object()) {
                for (const auto& [name, inner] : value.items()) add(items, {key}, name, inner);
            } else {
                add(items, {}, key, value);
            }
        }
        return items;
    }

private:
    static std::string scalar(const ojson& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    static void add(std::vector<CLI::ConfigItem>& items, std::vector<std::string> parents, const std::string& name,
                    const ojson& value) {
        if (value.is_null()) return;
        CLI::ConfigItem item;
        item.parents = std::move(parents);
        item.name = name;
        if (value.is_array()) {
            for (const auto& v : value) item.inputs.push_back(scalar(v));
        } else {
            item.inputs.push_back(scalar(value));
        }
        items.push_back(std::move(item));
    }
};

template <typename T>
std::optional<T> auto_or(const std::string& text, const char* flag) {
    if (text == "auto") return std::nullopt;
    T value{};
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw Error(ErrorCode::InvalidArgument, std::string("--") + flag + " expects auto or a number, got '" + text + "'");
    }
    return value;
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string data = buf.str();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::Io, "sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

// Write through a temporary file so readers never see a half-written artifact.
void write_file(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
        out << content;
        if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
    }
    fs::rename(tmp, path);
}

class Stopwatch {
public:
    double lap_ms() {
        const auto now = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
        last_ = now;
        return ms;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

struct Common {
    std::string config_path;
};

struct Tuning {
    std::string b = "auto", tau = "auto", L = "auto", sn = "auto", Mn = "auto";
    std::string kernel = "triangular";
    std::size_t boot = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;

    void attach(CLI::App* app) {
        app->add_option("--b", b, "mean-smoothing bandwidth (auto = GCV)")->capture_default_str();
        app->add_option("--tau", tau, "statistic bandwidth (auto = GCV)")->capture_default_str();
        app->add_option("--L", L, "bootstrap block length (auto = minimum volatility)")->capture_default_str();
        app->add_option("--sn", sn, "number of lags (auto = rule of thumb)")->capture_default_str();
        app->add_option("--Mn", Mn, "dependence gap (auto = rule of thumb)")->capture_default_str();
        app->add_option("--kernel", kernel, "triangular | epanechnikov")->capture_default_str();
        app->add_option("--seed", seed, "master seed for the bootstrap multipliers")->capture_default_str();
        app->add_option("--jobs", jobs, "worker threads; results do not depend on it")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    }

    TestConfig to_config() const {
        TestConfig cfg;
        cfg.b = auto_or<double>(b, "b");
        cfg.tau = auto_or<double>(tau, "tau");
        cfg.L = auto_or<std::size_t>(L, "L");
        cfg.s_n = auto_or<std::size_t>(sn, "sn");
        cfg.M_n = auto_or<std::size_t>(Mn, "Mn");
        cfg.kernel = parse_kernel(kernel);
        cfg.B = boot;
        cfg.alpha = alpha;
        cfg.seed = seed;
        cfg.jobs = jobs;
        return cfg;
    }

    ojson arguments() const {
        return {{"b", b},           {"tau", tau},   {"L", L},         {"sn", sn},     {"Mn", Mn},
                {"kernel", kernel}, {"boot", boot}, {"alpha", alpha}, {"seed", seed}, {"jobs", jobs}};
    }
};

ojson manifest(const std::string& sub, ojson args, const Common& common, std::uint64_t seed,
               const std::vector<std::string>& artifacts, ojson timings) {
    ojson m;
    m["tool"] = "lswn";
    m["version"] = kVersion;
    m["subcommand"] = sub;
    m["arguments"] = std::move(args);
    if (common.config_path.empty()) {
        m["config_file"] = nullptr;
        m["config_sha256"] = nullptr;
    } else {
        m["config_file"] = common.config_path;
        m["config_sha256"] = sha256_file(common.config_path);
    }
    m["seed"] = seed;
    m["artifacts"] = artifacts;
    m["timings_ms"] = std::move(timings);
    return m;
}

void write_manifest(const std::string& output, const ojson& m) {
    write_file(output + ".manifest.json", m.dump(2) + "\n");
}

void emit(const std::string& output, const std::string& text) {
    if (output.empty()) {
        std::cout << text;
    } else {
        write_file(output, text);
    }
}

// ---------------------------------------------------------------- test

struct TestArgs {
    std::string input, output, dump;
    bool keep_draws = false;
    Tuning tuning;
};

int cmd_test(const TestArgs& a, const Common& common) {
    Stopwatch clock;
    ojson timings;
    const auto panel = load_panel(a.input);
    timings["load"] = clock.lap_ms();
    TestConfig cfg = a.tuning.to_config();
    cfg.keep_draws = a.keep_draws;
    auto prepared = prepare_test(panel, cfg);
    timings["prepare"] = clock.lap_ms();

    std::vector<std::string> artifacts;
    if (!a.output.empty()) artifacts.push_back(a.output);
    if (!a.dump.empty()) {
        std::ostringstream gsum, gamma;
        write_gsum_surface(prepared.tensor, gsum);
        write_gamma_surfaces(prepared.residuals, prepared.tensor.window(), gamma);
        const std::string gamma_path = a.dump + ".gamma.csv";
        write_file(a.dump, gsum.str());
        write_file(gamma_path, gamma.str());
        artifacts.push_back(a.dump);
        artifacts.push_back(gamma_path);
        timings["surfaces"] = clock.lap_ms();
    }
    const auto result = finish_test(std::move(prepared), cfg);
    timings["bootstrap"] = clock.lap_ms();

    emit(a.output, to_json(result).dump(2) + "\n");
    if (!a.output.empty()) {
        ojson args = a.tuning.arguments();
        args["input"] = a.input;
        args["keep_draws"] = a.keep_draws;
        write_manifest(a.output, manifest("test", std::move(args), common, cfg.seed, artifacts, timings));
    }
    return 0;
}

// ------------------------------------------------------------ simulate

struct SimArgs {
    int model = 1;
    std::size_t n = 200, p = 5, N = 50, burn_in = 200;
    std::string hypothesis = "null";
    double delta = 0.0;
    std::uint64_t seed = 0;
    std::string output;
};

int cmd_simulate(const SimArgs& a, const Common& common) {
    Stopwatch clock;
    sim::SimSpec spec;
    spec.model = a.model;
    spec.hypothesis = sim::parse_hypothesis(a.hypothesis);
    spec.n = a.n;
    spec.p = a.p;
    spec.N = a.N;
    spec.delta = a.delta;
    spec.seed = a.seed;
    spec.burn_in = a.burn_in;
    const auto panel = sim::generate(spec);
    if (a.output.empty()) {
        save_panel(panel, std::cout, PanelFormat::LongCsv);
        return 0;
    }
    save_panel(panel, a.output);
    ojson args = {{"model", a.model},     {"n", a.n},         {"p", a.p},
                  {"N", a.N},             {"hypothesis", a.hypothesis},
                  {"delta", a.delta},     {"burn_in", a.burn_in}};
    write_manifest(a.output, manifest("simulate", std::move(args), common, a.seed, {a.output},
                                      {{"generate", clock.lap_ms()}}));
    return 0;
}

// ------------------------------------------------------------------ mc

struct McArgs {
    std::vector<int> models{1};
    std::vector<std::size_t> ns{200};
    std::vector<std::size_t> ps{5};
    std::vector<double> deltas{0.0};
    std::vector<double> alphas{0.05};
    std::size_t N = 50, reps = 200, burn_in = 200;
    std::string output;
    Tuning tuning;
};

std::string report_csv(const sim::McReport& report) {
    std::ostringstream out;
    sim::write_report_csv(report, out);
    return out.str();
}

int cmd_mc(const McArgs& a, const Common& common) {
    Stopwatch clock;
    std::vector<sim::SimSpec> cells;
    for (int model : a.models) {
        for (std::size_t n : a.ns) {
            for (std::size_t p : a.ps) {
                for (double delta : a.deltas) {
                    sim::SimSpec spec;
                    spec.model = model;
                    spec.n = n;
                    spec.p = p;
                    spec.N = a.N;
                    spec.delta = delta;
                    spec.burn_in = a.burn_in;
                    spec.hypothesis = delta > 0.0 ? sim::Hypothesis::Alternative : sim::Hypothesis::Null;
                    cells.push_back(spec);
                }
            }
        }
    }
    TestConfig cfg = a.tuning.to_config();
    sim::McOptions options;
    options.reps = a.reps;
    options.alphas = a.alphas;
    options.seed = a.tuning.seed;
    options.jobs = a.tuning.jobs;
    options.stop = &g_stop;
    if (!a.output.empty()) {
        options.checkpoint = [&](const sim::McReport& partial) { write_file(a.output, report_csv(partial)); };
    }

    g_stop.store(false);
    auto previous = std::signal(SIGINT, on_sigint);
    sim::McReport report;
    try {
        report = sim::monte_carlo(cells, cfg, options);
    } catch (...) {
        std::signal(SIGINT, previous);
        throw;
    }
    std::signal(SIGINT, previous);

    emit(a.output, report_csv(report));
    if (!a.output.empty()) {
        ojson args = a.tuning.arguments();
        args["model"] = a.models;
        args["n"] = a.ns;
        args["p"] = a.ps;
        args["delta"] = a.deltas;
        args["alpha"] = a.alphas;
        args["N"] = a.N;
        args["reps"] = a.reps;
        args["burn_in"] = a.burn_in;
        args["complete"] = report.complete;
        write_manifest(a.output, manifest("mc", std::move(args), common, a.tuning.seed, {a.output},
                                          {{"monte_carlo", clock.lap_ms()}}));
    }
    if (!report.complete) {
        std::cerr << "lswn: interrupted; partial table written\n";
        return 1;
    }
    return 0;
}

// ---------------------------------------------------------------- tune

struct TuneArgs {
    std::string input, output, curves;
    Tuning tuning;
};

std::string gcv_csv(const std::vector<GcvPoint>& curve, const char* name) {
    std::ostringstream out;
    out << name << ",score,trace\n";
    for (const auto& p : curve) {
        out << p.bandwidth << ',';
        if (std::isfinite(p.score)) out << p.score;
        out << ',' << p.trace << '\n';
    }
    return out.str();
}

std::string mv_csv(const std::vector<MvPoint>& curve) {
    std::ostringstream out;
    out << "L,gamma,objective\n";
    for (const auto& p : curve) {
        out << p.L << ',' << p.gamma << ',';
        if (std::isfinite(p.objective)) out << p.objective;
        out << '\n';
    }
    return out.str();
}

int cmd_tune(const TuneArgs& a, const Common& common) {
    Stopwatch clock;
    const auto panel = load_panel(a.input);
    const TestConfig cfg = a.tuning.to_config();
    const auto prepared = prepare_test(panel, cfg);
    ojson timings{{"prepare", clock.lap_ms()}};

    ojson doc;
    doc["params"] = params_to_json(prepared.config);
    doc["provenance"] = provenance_to_json(prepared.config);
    doc["tuning"] = to_json(prepared.tuning);
    emit(a.output, doc.dump(2) + "\n");

    std::vector<std::string> artifacts;
    if (!a.output.empty()) artifacts.push_back(a.output);
    std::string prefix = a.curves;
    if (prefix.empty() && !a.output.empty()) prefix = (fs::path(a.output).parent_path() / fs::path(a.output).stem()).string();
    if (!prefix.empty()) {
        const std::vector<std::pair<std::string, std::string>> files{
            {prefix + ".gcv_b.csv", gcv_csv(prepared.tuning.gcv_b, "b")},
            {prefix + ".gcv_tau.csv", gcv_csv(prepared.tuning.gcv_tau, "tau")},
            {prefix + ".mv.csv", mv_csv(prepared.tuning.mv)},
        };
        for (const auto& [path, text] : files) {
            write_file(path, text);
            artifacts.push_back(path);
        }
    }
    if (!a.output.empty()) {
        ojson args = a.tuning.arguments();
        args["input"] = a.input;
        write_manifest(a.output, manifest("tune", std::move(args), common, cfg.seed, artifacts, timings));
    }
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Multiplier-bootstrap white-noise test for multivariate functional time series", "lswn"};
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON file with flag values per subcommand; the command line wins");
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Common common;

    TestArgs test;
    auto* test_cmd = app.add_subcommand("test", "run the white-noise test on a panel");
    test_cmd->add_option("--input", test.input, "panel file (.csv long format or .ndjson)")
        ->required()
        ->check(CLI::ExistingFile);
    test_cmd->add_option("--alpha", test.tuning.alpha, "test level")->capture_default_str();
    test_cmd->add_option("--boot", test.tuning.boot, "bootstrap replicates B")->capture_default_str();
    test.tuning.attach(test_cmd);
    test_cmd->add_option("--output", test.output, "result JSON path (default: stdout)");
    test_cmd->add_option("--dump-surfaces", test.dump,
                         "write the G-sum surface CSV here and the Gamma surfaces to <path>.gamma.csv");
    test_cmd->add_flag("--keep-draws", test.keep_draws, "include the bootstrap draws in the JSON");

    SimArgs simulate;
    auto* sim_cmd = app.add_subcommand("simulate", "generate a panel from one of the simulation models");
    sim_cmd->add_option("--model", simulate.model, "1, 2 or 3")->capture_default_str();
    sim_cmd->add_option("--n", simulate.n, "sample size")->capture_default_str();
    sim_cmd->add_option("--p", simulate.p, "dimension")->capture_default_str();
    sim_cmd->add_option("--N", simulate.N, "grid size")->capture_default_str();
    sim_cmd->add_option("--hypothesis", simulate.hypothesis, "null | alt")->capture_default_str();
    sim_cmd->add_option("--delta", simulate.delta, "alternative strength")->capture_default_str();
    sim_cmd->add_option("--seed", simulate.seed, "seed")->capture_default_str();
    sim_cmd->add_option("--burn-in", simulate.burn_in, "GARCH burn-in steps (model 3)")->capture_default_str();
    sim_cmd->add_option("--output", simulate.output, "panel path (default: CSV on stdout)");

    McArgs mc;
    mc.tuning.boot = 500;
    mc.tuning.seed = 1;
    auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo rejection rates over a grid of models");
    mc_cmd->add_option("--model", mc.models, "models, comma separated")->delimiter(',')->capture_default_str();
    mc_cmd->add_option("--n", mc.ns, "sample sizes")->delimiter(',')->capture_default_str();
    mc_cmd->add_option("--p", mc.ps, "dimensions")->delimiter(',')->capture_default_str();
    mc_cmd->add_option("--delta", mc.deltas, "alternative strengths; 0 means the null")
        ->delimiter(',')
        ->capture_default_str();
    mc_cmd->add_option("--alpha", mc.alphas, "levels")->delimiter(',')->capture_default_str();
    mc_cmd->add_option("--N", mc.N, "grid size")->capture_default_str();
    mc_cmd->add_option("--reps", mc.reps, "replicates per cell")->capture_default_str();
    mc_cmd->add_option("--burn-in", mc.burn_in, "GARCH burn-in steps (model 3)")->capture_default_str();
    mc_cmd->add_option("--boot", mc.tuning.boot, "bootstrap replicates B")->capture_default_str();
    mc.tuning.attach(mc_cmd);
    mc_cmd->add_option("--output", mc.output, "CSV path, rewritten after every chunk (default: stdout)");

    TuneArgs tune;
    auto* tune_cmd = app.add_subcommand("tune", "resolve the tuning parameters and write the selection curves");
    tune_cmd->add_option("--input", tune.input, "panel file")->required()->check(CLI::ExistingFile);
    tune.tuning.attach(tune_cmd);
    tune_cmd->add_option("--output", tune.output, "TuningReport JSON path (default: stdout)");
    tune_cmd->add_option("--curves", tune.curves,
                         "prefix for <prefix>.gcv_b.csv, .gcv_tau.csv, .mv.csv (default: next to --output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    if (auto* opt = app.get_config_ptr(); opt && opt->count() > 0) common.config_path = opt->as<std::string>();

    try {
        if (*test_cmd) return cmd_test(test, common);
        if (*sim_cmd) return cmd_simulate(simulate, common);
        if (*mc_cmd) return cmd_mc(mc, common);
        if (*tune_cmd) return cmd_tune(tune, common);
    } catch (const std::exception& e) {
        std::cerr << "lswn: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace lswn::cli
