// SPDX-License-Identifier: MIT
#include "lvcal/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "lvcal/errors.hpp"

namespace lvcal {

namespace fs = std::filesystem;

namespace {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line;
};

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    CsvTable t;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (t.header.empty()) {
            t.header = split(line);
            continue;
        }
        t.rows.push_back(split(line));
        t.line.push_back(n);
        if (t.rows.back().size() != t.header.size()) {
            throw ParseError(path.string() + ":" + std::to_string(n) + ": expected " +
                             std::to_string(t.header.size()) + " fields");
        }
    }
    if (t.header.empty()) throw ParseError(path.string() + ": missing header");
    return t;
}

std::vector<std::size_t> column_index(const CsvTable& t, const fs::path& path, const std::vector<std::string>& cols) {
    std::vector<std::size_t> idx;
    for (const auto& c : cols) {
        const auto it = std::find(t.header.begin(), t.header.end(), c);
        if (it == t.header.end()) throw ParseError(path.string() + ": missing column '" + c + "'");
        idx.push_back(static_cast<std::size_t>(it - t.header.begin()));
    }
    return idx;
}

double parse_number(const std::string& s, const fs::path& path, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParseError(path.string() + ":" + std::to_string(line) + ": not a number: '" + s + "'");
    }
    return v;
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

std::vector<double> maturities_from(const Json& j, const std::string& field) {
    if (!j.is_array()) throw ValidationError(field + ": expected an array of maturities");
    return j.get<std::vector<double>>();
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<std::vector<double>> read_numeric_csv(const fs::path& path, const std::vector<std::string>& columns) {
    const CsvTable t = read_csv(path);
    const auto idx = column_index(t, path, columns);
    std::vector<std::vector<double>> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::vector<double> row;
        for (std::size_t c : idx) row.push_back(parse_number(t.rows[r][c], path, t.line[r]));
        out.push_back(std::move(row));
    }
    return out;
}

DiscountCurve read_curve_csv(const fs::path& path) {
    std::vector<double> tenors, discounts;
    for (const auto& row : read_numeric_csv(path, {"tenor", "discount"})) {
        tenors.push_back(row[0]);
        discounts.push_back(row[1]);
    }
    try {
        return DiscountCurve(std::move(tenors), std::move(discounts));
    } catch (const Error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_curve_csv(const DiscountCurve& curve, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "tenor,discount\n";
    for (std::size_t i = 0; i < curve.tenors().size(); ++i) {
        out << format_double(curve.tenors()[i]) << ',' << format_double(curve.discounts()[i]) << '\n';
    }
}

std::vector<VolQuote> read_quotes_csv(const fs::path& path) {
    std::vector<VolQuote> quotes;
    for (const auto& row : read_numeric_csv(path, {"maturity", "strike", "implied_vol"})) {
        quotes.push_back(VolQuote{row[0], row[1], row[2]});
    }
    return quotes;
}

void write_surface_csv(const MarketSnapshot& snapshot, const std::vector<double>& maturities,
                       const std::vector<double>& strikes, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "maturity,strike,implied_vol\n";
    for (double t : maturities) {
        const double fwd = forward_price(snapshot, t);
        for (double k : strikes) {
            out << format_double(t) << ',' << format_double(k) << ','
                << format_double(snapshot.surface.implied_vol(std::log(k / fwd), t)) << '\n';
        }
    }
}

LeverageSurface read_leverage_csv(const fs::path& path, SurfaceKind kind) {
    const CsvTable t = read_csv(path);
    const auto idx = column_index(t, path, {"maturity", "strike", "value", "flag"});
    std::map<double, std::map<double, std::pair<double, std::uint32_t>>> grid;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const double m = parse_number(row[idx[0]], path, t.line[r]);
        const double k = parse_number(row[idx[1]], path, t.line[r]);
        const double v = parse_number(row[idx[2]], path, t.line[r]);
        std::uint32_t f = 0;
        try {
            f = parse_flag_string(row[idx[3]]);
        } catch (const Error& e) {
            throw ParseError(path.string() + ":" + std::to_string(t.line[r]) + ": " + e.what());
        }
        if (!grid[m].emplace(k, std::make_pair(v, f)).second) {
            throw ParseError(path.string() + ":" + std::to_string(t.line[r]) + ": duplicate node");
        }
    }
    if (grid.empty()) throw ParseError(path.string() + ": no nodes");
    std::vector<double> strikes;
    for (const auto& [k, _] : grid.begin()->second) strikes.push_back(k);
    std::vector<double> mats, values;
    std::vector<std::uint32_t> flags;
    for (const auto& [m, row] : grid) {
        if (row.size() != strikes.size()) throw ParseError(path.string() + ": strike grid differs between maturities");
        std::size_t i = 0;
        for (const auto& [k, vf] : row) {
            if (k != strikes[i++]) throw ParseError(path.string() + ": strike grid differs between maturities");
            values.push_back(vf.first);
            flags.push_back(vf.second);
        }
        mats.push_back(m);
    }
    try {
        return LeverageSurface(kind, std::move(strikes), std::move(mats), std::move(values), std::move(flags));
    } catch (const Error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_leverage_csv(const LeverageSurface& surface, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "maturity,strike,value,flag\n";
    const auto strikes = surface.strikes();
    const auto mats = surface.maturities();
    for (std::size_t i = 0; i < mats.size(); ++i) {
        for (std::size_t k = 0; k < strikes.size(); ++k) {
            out << format_double(mats[i]) << ',' << format_double(strikes[k]) << ',' << format_double(surface.at(i, k))
                << ',' << flag_string(surface.flag_at(i, k)) << '\n';
        }
    }
}

DiscountCurve parse_curve(const Json& j, const fs::path& base_dir, const std::string& field) {
    try {
        if (j.is_string()) return read_curve_csv(base_dir / j.get<std::string>());
        if (j.is_object() && j.contains("flat_rate")) {
            return DiscountCurve::flat(j.at("flat_rate").get<double>(), get_or(j, "horizon", 100.0));
        }
        if (j.is_object() && j.contains("tenors")) {
            return DiscountCurve(j.at("tenors").get<std::vector<double>>(), j.at("discounts").get<std::vector<double>>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(field + ": " + e.what());
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ValidationError(field + ": " + e.what());
    }
    throw ValidationError(field + ": expected a CSV path, {flat_rate} or {tenors, discounts}");
}

MarketSnapshot parse_market(const Json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ValidationError("market: expected an object");
    if (!j.contains("spot")) throw ValidationError("market.spot: missing");
    if (!j.contains("surface")) throw ValidationError("market.surface: missing");
    const double spot = j.at("spot").get<double>();
    DiscountCurve dom = parse_curve(j.value("domestic_curve", Json{{"flat_rate", 0.0}}), base_dir,
                                    "market.domestic_curve");
    DiscountCurve fgn = parse_curve(j.value("foreign_curve", Json{{"flat_rate", 0.0}}), base_dir,
                                    "market.foreign_curve");
    const Json& s = j.at("surface");
    try {
        if (s.is_string()) {
            const auto quotes = read_quotes_csv(base_dir / s.get<std::string>());
            TotalVarianceSurface surf = surface_from_quotes(quotes, spot, dom, fgn);
            return MarketSnapshot(spot, std::move(dom), std::move(fgn), std::move(surf));
        }
        if (s.is_object() && s.contains("flat_vol")) {
            const auto mats = maturities_from(s.at("maturities"), "market.surface.maturities");
            TotalVarianceSurface surf = flat_surface(s.at("flat_vol").get<double>(), mats);
            return MarketSnapshot(spot, std::move(dom), std::move(fgn), std::move(surf));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("market.surface: ") + e.what());
    }
    throw ValidationError("market.surface: expected a quotes CSV path or {flat_vol, maturities}");
}

ModelSpec parse_model_spec(const Json& j, const MarketSnapshot& market, const fs::path& base_dir) {
    if (!j.is_object()) throw ValidationError("model: expected an object");
    ModelSpec spec;
    spec.spot0 = market.spot;
    spec.domestic_curve = market.domestic;
    spec.foreign_curve = market.foreign;
    try {
        auto rate = [&](const char* key) {
            HullWhiteParams p;
            if (j.contains(key)) {
                p.kappa = get_or(j.at(key), "kappa", 0.0);
                p.sigma = get_or(j.at(key), "sigma", 0.0);
            }
            return p;
        };
        spec.rate_d = rate("domestic_rate");
        spec.rate_f = rate("foreign_rate");
        spec.quanto_adjustment = get_or(j, "quanto_adjustment", true);
        if (j.contains("variance")) {
            const Json& v = j.at("variance");
            spec.variance = CirParams{get_or(v, "kappa", 0.0), get_or(v, "theta", 1.0), get_or(v, "xi", 0.0),
                                      get_or(v, "u0", 1.0)};
        }
        if (j.contains("leverage")) {
            spec.leverage = read_leverage_csv(base_dir / j.at("leverage").get<std::string>(), SurfaceKind::leverage);
        }
        if (j.contains("correlation")) {
            const Json& c = j.at("correlation");
            spec.correlation = make_correlation(get_or(c, "spot_dom", 0.0), get_or(c, "spot_for", 0.0),
                                                get_or(c, "dom_for", 0.0), get_or(c, "spot_var", 0.0),
                                                get_or(c, "dom_var", 0.0), get_or(c, "for_var", 0.0));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("model: ") + e.what());
    }
    return spec;
}

Json model_spec_to_json(const ModelSpec& spec) {
    Json j;
    j["spot0"] = spec.spot0;
    j["domestic_rate"] = {{"kappa", spec.rate_d.kappa}, {"sigma", spec.rate_d.sigma}};
    j["foreign_rate"] = {{"kappa", spec.rate_f.kappa}, {"sigma", spec.rate_f.sigma}};
    j["quanto_adjustment"] = spec.quanto_adjustment;
    j["variance"] = {{"kappa", spec.variance.kappa},
                     {"theta", spec.variance.theta},
                     {"xi", spec.variance.xi},
                     {"u0", spec.variance.u0}};
    const auto& c = spec.correlation;
    j["correlation"] = {{"spot_dom", c(kDriverSpot, kDriverDom)}, {"spot_for", c(kDriverSpot, kDriverFor)},
                        {"dom_for", c(kDriverDom, kDriverFor)},   {"spot_var", c(kDriverSpot, kDriverVar)},
                        {"dom_var", c(kDriverDom, kDriverVar)},   {"for_var", c(kDriverFor, kDriverVar)}};
    return j;
}

Json report_to_json(const CalibrationReport& report, const CalibrationConfig& cfg) {
    auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
    Json j;
    j["kind"] = report.surface.kind() == SurfaceKind::local_vol ? "local_vol" : "leverage";
    j["seed"] = report.seed;
    j["n_paths"] = report.n_paths;
    j["inner_iterations"] = cfg.inner_iterations;
    j["tolerance"] = cfg.tolerance;
    j["max_dt"] = cfg.simulation.max_dt;
    j["antithetic"] = cfg.simulation.antithetic;
    std::size_t flagged = 0;
    double worst_bps = 0.0;
    for (const auto& n : report.nodes) {
        if (n.flags != kFlagNone) ++flagged;
        if (std::isfinite(n.repricing_bps)) worst_bps = std::max(worst_bps, std::abs(n.repricing_bps));
    }
    j["summary"] = {{"nodes", report.nodes.size()}, {"flagged_nodes", flagged}, {"max_abs_repricing_bps", worst_bps}};
    Json slices = Json::array();
    for (const auto& s : report.slices) {
        slices.push_back({{"maturity", s.maturity},
                          {"sweeps", s.sweeps},
                          {"max_delta_log", s.max_delta},
                          {"converged", s.converged}});
    }
    j["slices"] = slices;
    Json nodes = Json::array();
    for (const auto& n : report.nodes) {
        nodes.push_back({{"maturity", n.maturity},
                         {"strike", n.strike},
                         {"value", n.value},
                         {"std_error", num(n.std_error)},
                         {"flag", flag_string(n.flags)},
                         {"expectation", num(n.expectation)},
                         {"expectation_std_error", num(n.expectation_std_error)},
                         {"target", num(n.target)},
                         {"repricing_bps", num(n.repricing_bps)}});
    }
    j["nodes"] = nodes;
    if (report.gyongy) {
        j["gyongy"] = {{"maturity", report.gyongy->maturity},
                       {"ks_statistic", report.gyongy->ks_statistic},
                       {"critical_value_1pct", report.gyongy->critical_value},
                       {"passed", report.gyongy->passed}};
    }
    return j;
}

Json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_json(const Json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace lvcal
