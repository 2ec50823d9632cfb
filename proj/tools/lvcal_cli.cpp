// SPDX-License-Identifier: MIT
// lvcal: config-driven front end for surface building, calibration, pricing
// and the verification suite.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lvcal/black_scholes.hpp"
#include "lvcal/calibrator.hpp"
#include "lvcal/dupire.hpp"
#include "lvcal/errors.hpp"
#include "lvcal/fokker_planck.hpp"
#include "lvcal/io.hpp"
#include "lvcal/kernels.hpp"
#include "lvcal/mc.hpp"
#include "lvcal/parallel.hpp"

#ifndef LVCAL_VERSION
#define LVCAL_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace lvcal;

namespace {

constexpr int kExitFailedChecks = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct Options {
    std::string command;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::string out = "out";
    std::optional<std::size_t> paths;
};

// --- config helpers -----------------------------------------------------------

template <class T>
T field(const Json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) throw ValidationError(path + "." + key + ": missing");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(path + "." + key + ": wrong type");
    }
}

template <class T>
T field_or(const Json& j, const std::string& path, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    return field<T>(j, path, key);
}

const Json& section(const Json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_object()) throw ValidationError(key + ": missing section");
    return j.at(key);
}

/// Grid from [..] or {"from", "to", "count"}.
std::vector<double> grid(const Json& j, const std::string& path) {
    if (j.is_array()) {
        try {
            return j.get<std::vector<double>>();
        } catch (const nlohmann::json::exception&) {
            throw ValidationError(path + ": expected numbers");
        }
    }
    if (j.is_object()) {
        const double a = field<double>(j, path, "from");
        const double b = field<double>(j, path, "to");
        const auto n = field<std::size_t>(j, path, "count");
        if (n < 2) throw ValidationError(path + ".count: must be at least 2");
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
        return v;
    }
    throw ValidationError(path + ": expected an array or {from, to, count}");
}

CalibrationConfig calibration_config(const Json& c) {
    const std::string p = "calibration";
    CalibrationConfig cfg;
    if (!c.contains("strikes")) throw ValidationError("calibration.strikes: missing");
    if (!c.contains("maturities")) throw ValidationError("calibration.maturities: missing");
    cfg.strike_grid = grid(c.at("strikes"), "calibration.strikes");
    cfg.maturity_grid = grid(c.at("maturities"), "calibration.maturities");
    cfg.n_paths = field_or<std::size_t>(c, p, "n_paths", cfg.n_paths);
    cfg.seed = field_or<std::uint64_t>(c, p, "seed", cfg.seed);
    cfg.inner_iterations = field_or<std::size_t>(c, p, "inner_iterations", cfg.inner_iterations);
    cfg.tolerance = field_or<double>(c, p, "tolerance", cfg.tolerance);
    cfg.simulation.max_dt = field_or<double>(c, p, "max_dt", cfg.simulation.max_dt);
    cfg.simulation.antithetic = field_or<bool>(c, p, "antithetic", cfg.simulation.antithetic);
    cfg.drift_control_variate = field_or<bool>(c, p, "drift_control_variate", cfg.drift_control_variate);
    cfg.gyongy_check = field_or<bool>(c, p, "gyongy_check", cfg.gyongy_check);
    if (c.contains("estimator")) {
        const Json& e = c.at("estimator");
        const std::string ep = "calibration.estimator";
        const auto kind = field_or<std::string>(e, ep, "kind", "kernel");
        if (kind == "kernel") {
            cfg.estimator.kind = ConditionalEstimator::Kind::kernel;
        } else if (kind == "bins") {
            cfg.estimator.kind = ConditionalEstimator::Kind::bins;
        } else {
            throw ValidationError(ep + ".kind: expected \"kernel\" or \"bins\"");
        }
        cfg.estimator.bandwidth = field_or<double>(e, ep, "bandwidth", cfg.estimator.bandwidth);
        cfg.estimator.n_bins = field_or<std::size_t>(e, ep, "n_bins", cfg.estimator.n_bins);
        cfg.estimator.min_effective = field_or<double>(e, ep, "min_effective", cfg.estimator.min_effective);
    }
    cfg.validate();
    return cfg;
}

/// Resolved copy of the config with command-line overrides applied.
Json resolve(Json j, const Options& o) {
    for (const char* key : {"calibration", "price"}) {
        if (!j.contains(key)) continue;
        if (o.seed) j[key]["seed"] = *o.seed;
        if (o.paths) j[key]["n_paths"] = *o.paths;
    }
    return j;
}

std::uint64_t fnv1a(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 14];
    while (in) {
        in.read(buf, sizeof buf);
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

std::string hex(std::uint64_t v) {
    char s[17];
    std::snprintf(s, sizeof s, "%016llx", static_cast<unsigned long long>(v));
    return s;
}

// --- run context --------------------------------------------------------------

class Run {
public:
    Run(Options o, Json config, fs::path base) : opt_(std::move(o)), config_(std::move(config)), base_(std::move(base)) {}

    const Json& config() const { return config_; }
    const fs::path& base() const { return base_; }
    fs::path out(const std::string& name) {
        artifacts_.push_back(name);
        return fs::path(opt_.out) / name;
    }
    void input(const fs::path& p) { inputs_.push_back(p); }

    template <class F>
    auto timed(const std::string& phase, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            timings_[phase] = seconds_since(t0);
        } else {
            auto r = f();
            timings_[phase] = seconds_since(t0);
            return r;
        }
    }

    void finish(const std::string& status, const std::string& error = {}) {
        Json m;
        m["tool"] = "lvcal";
        m["version"] = LVCAL_VERSION;
        m["command"] = opt_.command;
        m["status"] = status;
        if (!error.empty()) m["error"] = error;
        m["config_file"] = opt_.config;
        m["config"] = config_;
        m["kernels"] = std::string(simd::active_kernels().name);
        m["versions"] = {{"compiler", __VERSION__},
                         {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                       "." + std::to_string(EIGEN_MINOR_VERSION)},
                         {"boost", BOOST_LIB_VERSION},
                         {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
        Json inputs = Json::array();
        for (const auto& p : inputs_) {
            inputs.push_back({{"path", fs::relative(p, base_).generic_string()}, {"fnv1a64", hex(fnv1a(p))}});
        }
        m["inputs"] = inputs;
        Json arts = Json::array();
        for (const auto& a : artifacts_) {
            const fs::path p = fs::path(opt_.out) / a;
            if (!fs::exists(p)) continue;
            if (fs::is_directory(p)) {
                for (const auto& e : fs::directory_iterator(p)) {
                    arts.push_back({{"file", (fs::path(a) / e.path().filename()).generic_string()},
                                    {"bytes", fs::file_size(e.path())},
                                    {"fnv1a64", hex(fnv1a(e.path()))}});
                }
                continue;
            }
            arts.push_back({{"file", a}, {"bytes", fs::file_size(p)}, {"fnv1a64", hex(fnv1a(p))}});
        }
        m["artifacts"] = arts;
        m["timings_file"] = "timings.json";
        write_json(m, fs::path(opt_.out) / "manifest.json");
        // Run environment that does not affect results lives next to the timings.
        Json t{{"threads", thread_count()}, {"seconds", timings_}};
        write_json(t, fs::path(opt_.out) / "timings.json");
    }

private:
    static double seconds_since(std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    Options opt_;
    Json config_;
    fs::path base_;
    std::vector<std::string> artifacts_;
    std::vector<fs::path> inputs_;
    Json timings_ = Json::object();
};

void note_inputs(Run& run, const Json& j) {
    // Any string value that names an existing file next to the config is an input.
    if (j.is_string()) {
        const fs::path p = run.base() / j.get<std::string>();
        if (fs::is_regular_file(p)) run.input(p);
    } else if (j.is_structured()) {
        for (const auto& v : j) note_inputs(run, v);
    }
}

MarketSnapshot load_market(const Run& run) { return parse_market(section(run.config(), "market"), run.base()); }

ModelSpec load_model(const Run& run, const MarketSnapshot& m) {
    const Json& j = run.config().contains("model") ? run.config().at("model") : Json::object();
    return parse_model_spec(j, m, run.base());
}

void dump_outputs(Run& run, const Json& outputs, const ValidatedModel& model, const MarketSnapshot& market,
                  const std::vector<double>& maturities, std::size_t n_paths, std::uint64_t seed,
                  const SimulationOptions& sim, const LeverageSurface* lv) {
    if (field_or<bool>(outputs, "outputs", "path_dump", false)) {
        const auto dump_paths = field_or<std::size_t>(outputs, "outputs", "path_dump_paths", std::min<std::size_t>(n_paths, 10000));
        run.timed("path_dump", [&] {
            const PathBatch b = simulate_paths(model, maturities, dump_paths, seed, sim);
            write_path_dump(b, run.out("paths").string());
        });
    }
    if (field_or<bool>(outputs, "outputs", "density_dump", false)) {
        if (!lv) throw ValidationError("outputs.density_dump: needs a local-vol surface");
        run.timed("density_dump", [&] {
            FokkerPlanckConfig fp;
            fp.keep_times = maturities;
            const DensityGrid g = solve_forward_kolmogorov(*lv, market.domestic, market.foreign, market.spot, fp);
            write_density_csv(g, run.out("density.csv"));
        });
    }
}

// --- commands -------------------------------------------------------------------

int cmd_build_surface(Run& run) {
    const MarketSnapshot m = load_market(run);
    const Json& g = section(run.config(), "grid");
    if (!g.contains("strikes") || !g.contains("maturities")) throw ValidationError("grid: needs strikes and maturities");
    const std::vector<double> ks = grid(g.at("strikes"), "grid.strikes");
    const std::vector<double> ts = grid(g.at("maturities"), "grid.maturities");
    run.timed("surface", [&] { write_surface_csv(m, ts, ks, run.out("implied_vol.csv")); });
    const LeverageSurface lv = run.timed("local_vol", [&] { return local_vol_deterministic(m, ks, ts); });
    write_leverage_csv(lv, run.out("local_vol.csv"));
    return 0;
}

int cmd_calibrate_lv(Run& run) {
    const MarketSnapshot m = load_market(run);
    const ModelSpec spec = load_model(run, m);
    const CalibrationConfig cfg = calibration_config(section(run.config(), "calibration"));
    const CalibrationReport r = run.timed("calibrate", [&] { return calibrate_local_vol(m, spec, cfg); });
    write_leverage_csv(r.surface, run.out("local_vol.csv"));
    write_json(report_to_json(r, cfg), run.out("calibration_report.json"));
    const ValidatedModel model(local_vol_model(spec, r.surface));
    const Json outputs = run.config().value("outputs", Json::object());
    dump_outputs(run, outputs, model, m, cfg.maturity_grid, cfg.n_paths, cfg.seed, cfg.simulation, &r.surface);
    return 0;
}

int cmd_calibrate_slv(Run& run) {
    const MarketSnapshot m = load_market(run);
    const ModelSpec spec = load_model(run, m);
    const CalibrationConfig cfg = calibration_config(section(run.config(), "calibration"));
    std::optional<LeverageSurface> lv;
    if (run.config().contains("local_vol")) {
        lv = read_leverage_csv(run.base() / field<std::string>(run.config(), "config", "local_vol"),
                               SurfaceKind::local_vol);
    } else if (spec.rate_d.sigma > 0.0 || spec.rate_f.sigma > 0.0) {
        lv = run.timed("calibrate_lv", [&] { return calibrate_local_vol(m, spec, cfg).surface; });
    } else {
        lv = local_vol_deterministic(m, cfg.strike_grid, cfg.maturity_grid, cfg.limits);
    }
    write_leverage_csv(*lv, run.out("local_vol.csv"));
    const CalibrationReport r =
        run.timed("calibrate_slv", [&] { return calibrate_slv_leverage(m, spec, cfg, *lv); });
    write_leverage_csv(r.surface, run.out("leverage.csv"));
    write_json(report_to_json(r, cfg), run.out("calibration_report.json"));
    ModelSpec slv = spec;
    slv.leverage = r.surface;
    const ValidatedModel model(slv);
    const Json outputs = run.config().value("outputs", Json::object());
    dump_outputs(run, outputs, model, m, cfg.maturity_grid, cfg.n_paths, cfg.seed, cfg.simulation, &*lv);
    return 0;
}

int cmd_price(Run& run) {
    const MarketSnapshot m = load_market(run);
    ModelSpec spec = load_model(run, m);
    std::optional<LeverageSurface> lv;
    if (run.config().contains("local_vol")) {
        lv = read_leverage_csv(run.base() / field<std::string>(run.config(), "config", "local_vol"),
                               SurfaceKind::local_vol);
        spec = local_vol_model(spec, *lv);
    } else if (!spec.leverage) {
        throw ValidationError("local_vol: a local-vol CSV or model.leverage is required for pricing");
    }
    const Json& p = section(run.config(), "price");
    if (!p.contains("options") || !p.at("options").is_array()) throw ValidationError("price.options: missing");
    struct Opt {
        double t, k;
    };
    std::vector<Opt> opts;
    std::vector<double> mats;
    for (std::size_t i = 0; i < p.at("options").size(); ++i) {
        const Json& o = p.at("options")[i];
        const std::string path = "price.options[" + std::to_string(i) + "]";
        const Opt x{field<double>(o, path, "maturity"), field<double>(o, path, "strike")};
        if (!(x.t > 0.0) || x.t > m.horizon()) {
            throw OutOfRangeError(path + ": maturity " + format_double(x.t) + " outside the market horizon");
        }
        const double fwd = forward_price(m, x.t);
        const auto [lo, hi] = m.surface.y_range(x.t);
        if (!(x.k > 0.0) || std::log(x.k / fwd) < lo - 1e-12 || std::log(x.k / fwd) > hi + 1e-12) {
            throw OutOfRangeError(path + ": strike " + format_double(x.k) + " outside surface range [" +
                                  format_double(fwd * std::exp(lo)) + ", " + format_double(fwd * std::exp(hi)) +
                                  "] at T=" + format_double(x.t));
        }
        opts.push_back(x);
        mats.push_back(x.t);
    }
    const auto n_paths = field_or<std::size_t>(p, "price", "n_paths", 100000);
    const auto seed = field_or<std::uint64_t>(p, "price", "seed", 1);
    SimulationOptions sim;
    sim.max_dt = field_or<double>(p, "price", "max_dt", sim.max_dt);
    sim.antithetic = field_or<bool>(p, "price", "antithetic", false);
    const ValidatedModel model(spec);
    const PathBatch batch = run.timed("simulate", [&] { return simulate_paths(model, mats, n_paths, seed, sim); });

    std::ofstream out(run.out("prices.csv"));
    out << "maturity,strike,price,std_error,implied_vol,market_vol,error_bps\n";
    for (const Opt& o : opts) {
        const PathView v = batch.at(o.t);
        const double fwd = forward_price(m, o.t);
        const EstimateWithError c = vanilla_price(v, o.k, OptionType::call, fwd);
        double iv = std::nan("");
        try {
            iv = mc_implied_vol(c.value, m, o.k, o.t).vol;
        } catch (const SolverError&) {
        }
        const double mkt = m.surface.implied_vol(std::log(o.k / fwd), o.t);
        out << format_double(o.t) << ',' << format_double(o.k) << ',' << format_double(c.value) << ','
            << format_double(c.std_error) << ',' << format_double(iv) << ',' << format_double(mkt) << ','
            << format_double((iv - mkt) * 1e4) << '\n';
    }
    out.close();
    const Json outputs = run.config().value("outputs", Json::object());
    dump_outputs(run, outputs, model, m, observation_grid(mats), n_paths, seed, sim, lv ? &*lv : nullptr);
    return 0;
}

// --- verify ---------------------------------------------------------------------------

struct Check {
    std::string name;
    double value;
    double tolerance;
    bool passed() const { return std::isfinite(value) && value <= tolerance; }
};

int cmd_verify(Run& run) {
    const MarketSnapshot m = load_market(run);
    const ModelSpec spec = load_model(run, m);
    const CalibrationConfig cfg = calibration_config(section(run.config(), "calibration"));
    std::vector<Check> checks;

    // Flat-surface identity.
    {
        const MarketSnapshot flat(m.spot, m.domestic, m.foreign, flat_surface(0.2, cfg.maturity_grid));
        const LeverageSurface s = local_vol_deterministic(flat, cfg.strike_grid, cfg.maturity_grid);
        double worst = 0.0;
        for (double v : s.values()) worst = std::max(worst, std::abs(v - 0.2));
        checks.push_back({"flat_surface_identity", worst, 1e-10});
    }
    // Call and TIV forms on the market surface.
    {
        double worst = 0.0;
        for (double t : cfg.maturity_grid) {
            for (double k : cfg.strike_grid) {
                const MarketPoint mp = market_point(m, k, t);
                const CallDerivatives cd = call_derivatives(mp);
                const double a = lv_deterministic_call(cd.dC_dT, cd.dC_dK, cd.d2C_dK2, cd.price, k, mp.bs.f_dom,
                                                       mp.bs.f_for, mp.discount)
                                     .variance;
                const double b = lv_deterministic_tiv(mp.tv, mp.bs.y).variance;
                worst = std::max(worst, std::abs(std::sqrt(a) - std::sqrt(b)) / std::sqrt(b));
            }
        }
        checks.push_back({"call_vs_tiv_form", worst, 1e-5});
    }
    // Black-Scholes partials against central differences.
    {
        double worst = 0.0;
        for (double y : {-0.3, 0.0, 0.25}) {
            for (double w : {0.02, 0.09}) {
                auto c = [&](double dy, double dw) { return bs_call_tiv(BsPoint{1.0, y + dy, w + dw, 1.0, 0.0, 0.0}); };
                const BsPartials g = bs_partials(BsPoint{1.0, y, w, 1.0, 0.0, 0.0});
                const double h = 1e-5 * w;
                worst = std::max(worst, std::abs(g.dC_dw - (c(0, h) - c(0, -h)) / (2 * h)) / g.dC_dw);
                worst = std::max(worst, std::abs(g.dC_dy - (c(1e-5, 0) - c(-1e-5, 0)) / 2e-5) / std::abs(g.dC_dy));
            }
        }
        checks.push_back({"bs_partials_fd", worst, 1e-6});
    }
    // Calibration under the fixture's deterministic rates reproduces Dupire.
    {
        const CalibrationReport r = run.timed("calibrate", [&] { return calibrate_local_vol(m, spec, cfg); });
        const LeverageSurface det = local_vol_deterministic(m, cfg.strike_grid, cfg.maturity_grid, cfg.limits);
        double worst = 0.0;
        for (std::size_t i = 0; i < r.surface.values().size(); ++i) {
            worst = std::max(worst, std::abs(r.surface.values()[i] - det.values()[i]));
        }
        checks.push_back({"deterministic_rate_calibration", worst, 1e-10});
        write_leverage_csv(r.surface, run.out("local_vol.csv"));
    }
    // Density solver: mass and Black-Scholes prices at flat 20%.
    {
        FokkerPlanckConfig fp;
        fp.keep_times = {1.0};
        const DiscountCurve zero = DiscountCurve::flat(0.0);
        const DensityGrid g =
            solve_forward_kolmogorov([](double, double) { return 0.2; }, zero, zero, 1.0, fp);
        checks.push_back({"fp_mass", std::abs(g.mass(1) - 1.0), 1e-6});
        const std::vector<double> ks{0.8, 1.0, 1.2};
        const DensityPrices p = density_call_prices(g, 1.0, ks, 1.0);
        double worst = 0.0;
        for (std::size_t i = 0; i < ks.size(); ++i) {
            const double bs = bs_call_tiv(BsPoint{ks[i], std::log(ks[i]), 0.04, 1.0, 0.0, 0.0});
            worst = std::max(worst, std::abs(p.prices[i] - bs));
        }
        checks.push_back({"fp_bs_prices", worst, 1e-4});
    }
    // Martingale under the model dynamics, in standard errors.
    {
        const ValidatedModel model(local_vol_model(spec, LeverageSurface::constant(SurfaceKind::local_vol, 0.2)));
        const double t = cfg.maturity_grid.back();
        const double times[] = {t};
        const PathBatch b = simulate_paths(model, times, cfg.n_paths, cfg.seed, cfg.simulation);
        const EstimateWithError e = t_forward_expectation(b.at(t), [](const StateVector& x) { return x.s; });
        checks.push_back({"martingale_se", std::abs(e.value - forward_price(m, t)) / e.std_error, 3.0});
    }

    Json out = Json::array();
    bool ok = true;
    for (const Check& c : checks) {
        ok = ok && c.passed();
        out.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"passed", c.passed()}});
        std::cout << (c.passed() ? "PASS " : "FAIL ") << c.name << " value=" << format_double(c.value)
                  << " tol=" << format_double(c.tolerance) << '\n';
    }
    write_json(Json{{"passed", ok}, {"checks", out}}, run.out("verify.json"));
    return ok ? 0 : kExitFailedChecks;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local-volatility and leverage calibration under stochastic rates"};
    app.require_subcommand(1);
    Options opt;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"build-surface", "Implied-vol grid and deterministic-rate local vol"},
        {"calibrate-lv", "Local vol under stochastic rates"},
        {"calibrate-slv", "SLV leverage function"},
        {"price", "Monte-Carlo vanilla prices under a calibrated model"},
        {"verify", "Deterministic verification suite"}};
    std::size_t threads = 0;
    std::uint64_t seed = 0;
    std::size_t paths = 0;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Override the RNG seed");
        sub->add_option("--threads", threads, "Cap on worker threads");
        sub->add_option("--out", opt.out, "Output directory");
        sub->add_option("--paths", paths, "Override the number of paths");
        sub->callback([&opt, name = name] { opt.command = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }
    for (CLI::App* sub : app.get_subcommands()) {
        if (sub->count("--seed")) opt.seed = seed;
        if (sub->count("--threads")) opt.threads = threads;
        if (sub->count("--paths")) opt.paths = paths;
    }
    if (opt.threads) set_thread_count(*opt.threads);

    std::optional<Run> run;
    try {
        fs::create_directories(opt.out);
        const fs::path cfg_path = fs::absolute(opt.config);
        run.emplace(opt, resolve(read_json(cfg_path), opt), cfg_path.parent_path());
        run->input(cfg_path);
        note_inputs(*run, run->config());
        int rc = 0;
        if (opt.command == "build-surface") rc = cmd_build_surface(*run);
        else if (opt.command == "calibrate-lv") rc = cmd_calibrate_lv(*run);
        else if (opt.command == "calibrate-slv") rc = cmd_calibrate_slv(*run);
        else if (opt.command == "price") rc = cmd_price(*run);
        else rc = cmd_verify(*run);
        run->finish(rc == 0 ? "ok" : "checks_failed");
        return rc;
    } catch (const ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        if (run) run->finish("usage_error", e.what());
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        if (run) run->finish("usage_error", e.what());
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (run) run->finish("error", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (run) run->finish("error", e.what());
        return kExitNumerical;
    }
}
