#include "morphwing/common.hpp"
#include "morphwing/csv.hpp"
#include "morphwing/units.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <random>
#include <sstream>

namespace morphwing {
namespace {

using units::Dimension;

TEST(Csv, FormatRoundTripsBitExactly) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(csv::parse(csv::format(v)), v);
  }
  EXPECT_EQ(csv::format(0.1), "0.1");
  EXPECT_EQ(csv::parse(csv::format(std::numeric_limits<double>::denorm_min())),
            std::numeric_limits<double>::denorm_min());
}

TEST(Csv, RejectsJunk) {
  EXPECT_THROW(csv::parse("1.0x"), Error);
  EXPECT_THROW(csv::parse(""), Error);
}

TEST(Csv, WriterChecksWidth) {
  std::ostringstream os;
  csv::Writer w(os, {"a", "b"}, {"note"});
  w.row({1.0, 2.5});
  EXPECT_THROW(w.row({1.0}), Error);
  EXPECT_EQ(os.str(), "# note\na,b\n1,2.5\n");
}

TEST(Units, ParsesSuffixedQuantities) {
  EXPECT_DOUBLE_EQ(units::parse("1.04mm", Dimension::length), 1.04e-3);
  EXPECT_DOUBLE_EQ(units::parse("10Hz", Dimension::frequency), 10.0);
  EXPECT_DOUBLE_EQ(units::parse("2.5GPa", Dimension::pressure), 2.5e9);
  EXPECT_DOUBLE_EQ(units::parse("20gf", Dimension::force), 20.0 * kGramForce);
  EXPECT_DOUBLE_EQ(units::parse("180deg", Dimension::angle), kPi);
  EXPECT_DOUBLE_EQ(units::parse(" 0.25 s ", Dimension::time), 0.25);
  EXPECT_DOUBLE_EQ(units::parse("+3ms", Dimension::time), 3e-3);
  EXPECT_DOUBLE_EQ(units::parse("4.5%", Dimension::dimensionless), 0.045);
}

TEST(Units, TargetUnitIsExact) {
  EXPECT_EQ(units::parse("1.04mm", Dimension::length, "mm"), 1.04);
  EXPECT_EQ(units::parse("38um", Dimension::length, "um"), 38.0);
  EXPECT_NEAR(units::parse("0.00104m", Dimension::length, "mm"), 1.04, 1e-15);
}

TEST(Units, ErrorsNameExpectedSuffixes) {
  try {
    units::parse("1.04", Dimension::length);
    FAIL() << "no throw";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("missing unit suffix"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("mm"), std::string::npos);
  }
  try {
    units::parse("3Hz", Dimension::length);
    FAIL() << "no throw";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("unit 'Hz'"), std::string::npos);
  }
  EXPECT_THROW(units::parse("3mm", Dimension::dimensionless), ConfigError);
  EXPECT_THROW(units::parse("abc", Dimension::length), ConfigError);
}

TEST(Units, FormatParsesBack) {
  for (double v : {1.04e-3, -2.5e9, 0.0, 1.0 / 3.0}) {
    EXPECT_EQ(units::parse(units::format(v, Dimension::length), Dimension::length), v);
    EXPECT_EQ(units::parse(units::format(v, "mm"), Dimension::length, "mm"), v);
  }
}

}  // namespace
}  // namespace morphwing
