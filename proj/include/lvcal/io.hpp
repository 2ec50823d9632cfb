// SPDX-License-Identifier: MIT
/// @file io.hpp
/// @brief CSV and JSON readers/writers for curves, surfaces, model specs and reports
///
/// CSV layouts (header line required, comma separated):
///   curve      tenor,discount
///   quotes     maturity,strike,implied_vol
///   leverage   maturity,strike,value,flag     (flag: "ok" or names joined by '|')
/// Numbers are written with 17 significant digits so files round-trip exactly.

#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "lvcal/calibrator.hpp"
#include "lvcal/curves.hpp"
#include "lvcal/leverage_surface.hpp"
#include "lvcal/market.hpp"
#include "lvcal/model.hpp"
#include "lvcal/surface.hpp"

namespace lvcal {

using Json = nlohmann::ordered_json;

/// Rows of a CSV file keyed by the header; throws ParseError with file:line.
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path,
                                                  const std::vector<std::string>& columns);

DiscountCurve read_curve_csv(const std::filesystem::path& path);
void write_curve_csv(const DiscountCurve& curve, const std::filesystem::path& path);

std::vector<VolQuote> read_quotes_csv(const std::filesystem::path& path);
/// Implied vols of the snapshot surface at every (maturity, strike) pair.
void write_surface_csv(const MarketSnapshot& snapshot, const std::vector<double>& maturities,
                       const std::vector<double>& strikes, const std::filesystem::path& path);

LeverageSurface read_leverage_csv(const std::filesystem::path& path, SurfaceKind kind);
void write_leverage_csv(const LeverageSurface& surface, const std::filesystem::path& path);

/// Curve from JSON: a CSV path (relative to base_dir), {"flat_rate": r[, "horizon": h]}
/// or {"tenors": [...], "discounts": [...]}.
DiscountCurve parse_curve(const Json& j, const std::filesystem::path& base_dir, const std::string& field);

/// Market section: spot, domestic_curve, foreign_curve and surface (a quotes CSV
/// path or {"flat_vol": v, "maturities": [...]}).
MarketSnapshot parse_market(const Json& j, const std::filesystem::path& base_dir);

/// Model dynamics section (see README for the schema). Spot and curves are
/// taken from the market snapshot.
ModelSpec parse_model_spec(const Json& j, const MarketSnapshot& market, const std::filesystem::path& base_dir);

Json model_spec_to_json(const ModelSpec& spec);

Json report_to_json(const CalibrationReport& report, const CalibrationConfig& cfg);

/// Reads a JSON document; throws ParseError naming the file on failure.
Json read_json(const std::filesystem::path& path);
void write_json(const Json& j, const std::filesystem::path& path);

/// Shortest round-trip text for a double.
std::string format_double(double v);

}  // namespace lvcal
