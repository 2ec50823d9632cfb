// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "lvcal/errors.hpp"
#include "lvcal/io.hpp"
#include "test_support.hpp"

using namespace lvcal;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("lvcal_io_" + std::string(
                   ::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& text) {
        std::ofstream(dir_ / name) << text;
        return dir_ / name;
    }

    fs::path dir_;
};

}  // namespace

TEST_F(IoTest, CurveRoundTrip) {
    const DiscountCurve c({0.0, 0.5, 1.0, 3.0}, {1.0, 0.9876543210987654, 0.975, 0.9});
    write_curve_csv(c, dir_ / "c.csv");
    const DiscountCurve back = read_curve_csv(dir_ / "c.csv");
    EXPECT_EQ(lvcal::testing::vec(back.tenors()), lvcal::testing::vec(c.tenors()));
    EXPECT_EQ(back.discount(0.5), c.discount(0.5));
}

TEST_F(IoTest, LeverageRoundTripWithFlags) {
    const LeverageSurface s(SurfaceKind::local_vol, {0.8, 1.0, 1.2}, {0.5, 1.0},
                            {0.21, 0.2, 0.19, 0.1 / 3.0, 0.2, 0.3},
                            {kFlagNone, kFlagSparse, kFlagNone, kFlagFlooredVariance | kFlagNonConverged, 0, 0});
    write_leverage_csv(s, dir_ / "l.csv");
    const LeverageSurface b = read_leverage_csv(dir_ / "l.csv", SurfaceKind::local_vol);
    EXPECT_EQ(lvcal::testing::vec(b.values()), lvcal::testing::vec(s.values()));
    EXPECT_EQ(lvcal::testing::vec(b.flags()), lvcal::testing::vec(s.flags()));
    EXPECT_EQ(lvcal::testing::vec(b.strikes()), lvcal::testing::vec(s.strikes()));
    EXPECT_EQ(lvcal::testing::vec(b.maturities()), lvcal::testing::vec(s.maturities()));
}

TEST_F(IoTest, CsvErrorsCarryLineNumbers) {
    const fs::path p = write("q.csv", "maturity,strike,implied_vol\n1.0,1.0,0.2\n1.0,abc,0.2\n");
    try {
        read_quotes_csv(p);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
    }
    EXPECT_THROW(read_curve_csv(write("bad.csv", "tenor,value\n0,1\n")), ParseError);
    EXPECT_THROW(read_curve_csv(dir_ / "missing.csv"), ParseError);
    EXPECT_THROW(read_leverage_csv(write("f.csv", "maturity,strike,value,flag\n1,1,0.2,bogus\n"),
                                   SurfaceKind::local_vol),
                 ParseError);
}

TEST_F(IoTest, MarketFromJson) {
    write("q.csv", "maturity,strike,implied_vol\n0.5,0.9,0.21\n0.5,1.0,0.2\n0.5,1.1,0.205\n"
                   "1.0,0.9,0.215\n1.0,1.0,0.2\n1.0,1.1,0.21\n");
    const Json j = Json::parse(R"({"spot": 1.0, "domestic_curve": {"flat_rate": 0.03},
                                   "foreign_curve": {"tenors": [0, 2], "discounts": [1, 0.98]},
                                   "surface": "q.csv"})");
    const MarketSnapshot m = parse_market(j, dir_);
    EXPECT_NEAR(m.domestic.discount(1.0), std::exp(-0.03), 1e-15);
    EXPECT_NEAR(m.surface.implied_vol(std::log(1.0 / forward_price(m, 1.0)), 1.0), 0.2, 1e-12);

    const Json flat = Json::parse(R"({"spot": 2.0, "surface": {"flat_vol": 0.2, "maturities": [1, 2]}})");
    EXPECT_EQ(parse_market(flat, dir_).spot, 2.0);
}

TEST_F(IoTest, MarketErrorsNameTheField) {
    auto message = [&](const char* text) {
        try {
            parse_market(Json::parse(text), dir_);
        } catch (const ValidationError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message(R"({"surface": {"flat_vol": 0.2, "maturities": [1]}})").find("market.spot"), std::string::npos);
    EXPECT_NE(message(R"({"spot": 1})").find("market.surface"), std::string::npos);
    EXPECT_NE(message(R"({"spot": 1, "domestic_curve": 3, "surface": {"flat_vol": 0.2, "maturities": [1]}})")
                  .find("domestic_curve"),
              std::string::npos);
}

TEST_F(IoTest, ModelSpecRoundTrip) {
    const MarketSnapshot m(1.0, DiscountCurve::flat(0.03), DiscountCurve::flat(0.01),
                           flat_surface(0.2, std::vector<double>{1.0}));
    const Json j = Json::parse(R"({"domestic_rate": {"kappa": 0.1, "sigma": 0.01},
                                   "foreign_rate": {"kappa": 0.05, "sigma": 0.012},
                                   "variance": {"kappa": 1.0, "theta": 0.04, "xi": 0.3, "u0": 0.04},
                                   "correlation": {"spot_dom": 0.3, "spot_for": -0.2, "dom_for": 0.2, "spot_var": -0.6}})");
    const ModelSpec spec = parse_model_spec(j, m, dir_);
    EXPECT_EQ(spec.rate_f.sigma, 0.012);
    EXPECT_EQ(spec.correlation(kDriverSpot, kDriverVar), -0.6);
    EXPECT_EQ(spec.domestic_curve.discount(1.0), m.domestic.discount(1.0));
    const ModelSpec again = parse_model_spec(model_spec_to_json(spec), m, dir_);
    EXPECT_EQ(again.correlation, spec.correlation);
    EXPECT_EQ(again.variance.xi, 0.3);
    EXPECT_THROW(parse_model_spec(Json::parse(R"({"variance": {"kappa": "x"}})"), m, dir_), ValidationError);
}

TEST(Format, RoundTripDoubles) {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.2}) EXPECT_EQ(std::stod(format_double(v)), v);
    EXPECT_EQ(format_double(0.2), "0.2");
}
