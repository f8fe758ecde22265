#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "magnetic_gaps/error.hpp"
#include "magnetic_gaps/harness.hpp"

namespace mg = magnetic_gaps;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

mg::ZeroDatum constant_form_zero(double b0) {
  mg::ZeroDatum z;
  z.order = 0;
  z.leading_form = mg::Polynomial2::constant(b0);
  return z;
}

mg::VerificationConfig landau_config(std::vector<int> schedule) {
  mg::VerificationConfig c;
  c.field_path = "constant";
  c.field = mg::PeriodicScalarField::constant(2.0 * pi);
  c.injected_zeros = {constant_form_zero(2.0 * pi)};
  c.n_schedule = std::move(schedule);
  c.theta_samples = 2;
  c.model_levels = 3;
  c.svg = false;
  return c;
}

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("magnetic_gaps_" + name + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  fs::remove_all(d);
  return d;
}

mg::ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const mg::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return mg::ErrorKind::InvalidArgument;
}

}  // namespace

TEST(PredictIntervals, Arithmetic) {
  const auto a = mg::predict_intervals(std::vector<double>{1.0, 3.0}, 0.1);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_DOUBLE_EQ(a[0].a, 1.2);
  EXPECT_DOUBLE_EQ(a[0].b, 2.8);
  const auto b = mg::predict_intervals(std::vector<double>{1.0, 3.0, 5.0}, 0.25);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_DOUBLE_EQ(b[0].a, 1.5);
  EXPECT_DOUBLE_EQ(b[0].b, 2.5);
  EXPECT_DOUBLE_EQ(b[1].a, 3.5);
  EXPECT_DOUBLE_EQ(b[1].b, 4.5);
  EXPECT_EQ(b[1].m, 2);
  const auto abs = b[0].absolute(0.25, 1.5);
  EXPECT_DOUBLE_EQ(abs.first, 1.5 * 0.125);
  EXPECT_DOUBLE_EQ(abs.second, 2.5 * 0.125);
  EXPECT_THROW(mg::predict_intervals(std::vector<double>{1.0}, 0.1), mg::Error);
}

TEST(ModelLadder, TestFieldTwoIdenticalZeros) {
  const auto zeros = mg::analyze_zeros(mg::PeriodicScalarField::test_field());
  ASSERT_EQ(zeros.size(), 2u);
  const auto both = mg::build_model_ladder(zeros, 2);
  const auto one = mg::build_model_ladder(std::vector<mg::ZeroDatum>{zeros[0]}, 2);
  EXPECT_EQ(both.k, 2);
  EXPECT_DOUBLE_EQ(both.exponent, 1.5);
  ASSERT_EQ(both.levels.size(), 2u);
  for (int i = 0; i < 2; ++i) {
    EXPECT_DOUBLE_EQ(both.levels[i].value, one.levels[i].value);
    EXPECT_EQ(both.levels[i].multiplicity, 2 * one.levels[i].multiplicity);
  }
  // Regression values from the first converged build (model grid 192).
  const auto iv = mg::predict_intervals(both, 0.1);
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_NEAR(both.levels[0].value, 14.518083, 1e-5);
  EXPECT_NEAR(both.levels[1].value, 24.723520, 1e-5);
  EXPECT_NEAR(iv[0].a, 14.518083 + 0.1 * (24.723520 - 14.518083), 2e-5);
  EXPECT_NEAR(iv[0].b, 24.723520 - 0.1 * (24.723520 - 14.518083), 2e-5);
}

TEST(ModelLadder, SingleLevelIsPositive) {
  const auto zeros = mg::analyze_zeros(mg::PeriodicScalarField::test_field());
  mg::LadderOptions o;
  o.model_grid = 128;
  const auto l = mg::build_model_ladder(std::vector<mg::ZeroDatum>{zeros[0]}, 1, o);
  ASSERT_EQ(l.levels.size(), 1u);
  EXPECT_GT(l.levels[0].value, 0.0);
}

TEST(ModelLadder, ConstantFormGivesLandauLadder) {
  const auto l = mg::build_model_ladder(std::vector<mg::ZeroDatum>{constant_form_zero(1.0)}, 3);
  EXPECT_EQ(l.k, 0);
  EXPECT_DOUBLE_EQ(l.exponent, 1.0);
  ASSERT_EQ(l.levels.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(l.levels[i].value, 2.0 * i + 1.0, 0.01 * (2.0 * i + 1.0));
    EXPECT_EQ(l.levels[i].multiplicity, 1);
  }
}

TEST(ModelLadder, MixedOrdersAreRejected) {
  auto z2 = mg::analyze_zeros(mg::PeriodicScalarField::test_field()).front();
  EXPECT_EQ(kind_of([&] { mg::build_model_ladder(std::vector<mg::ZeroDatum>{constant_form_zero(1.0), z2}, 2); }),
            mg::ErrorKind::InvalidConfig);
}

TEST(VerificationConfig, ParsesFlatText) {
  std::istringstream in(
      "field = fields/b.txt\nn_schedule = 4, 6,8\ntheta_samples = 4\ngrid = auto\nmodel_levels = 3\n"
      "margin = 0.2\nn_min_pass = 6\nsvg = false\n");
  const auto c = mg::verification_config_from(mg::parse_key_values(in), "/data");
  EXPECT_EQ(c.field_path, "/data/fields/b.txt");
  EXPECT_EQ(c.n_schedule, (std::vector<int>{4, 6, 8}));
  EXPECT_EQ(c.theta_samples, 4);
  EXPECT_EQ(c.grid_n, 0);
  EXPECT_EQ(c.model_levels, 3);
  EXPECT_DOUBLE_EQ(c.margin, 0.2);
  EXPECT_EQ(c.n_min_pass, 6);
  EXPECT_FALSE(c.svg);
}

TEST(VerificationConfig, ConstantZeroInjectsOracle) {
  const auto c = mg::read_verification_config(std::string(MAGNETIC_GAPS_TEST_DATA) + "/verify_landau.cfg");
  ASSERT_EQ(c.injected_zeros.size(), 1u);
  EXPECT_EQ(c.injected_zeros[0].order, 0);
  EXPECT_DOUBLE_EQ(c.injected_zeros[0].leading_form(0.3, -0.2), 6.283185307179586);
  EXPECT_EQ(c.field_path, std::string(MAGNETIC_GAPS_TEST_DATA) + "/constant_field.txt");
}

TEST(VerificationConfig, Rejections) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return mg::verification_config_from(mg::parse_key_values(in));
  };
  EXPECT_EQ(kind_of([&] { parse("field = a\nbogus = 1\n"); }), mg::ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([&] { parse("n_schedule = 4\n"); }), mg::ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([&] { mg::validate(parse("field = a\n")); }), mg::ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([&] { mg::validate(parse("field = a\nn_schedule = 6,4\n")); }), mg::ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([&] { mg::validate(parse("field = a\nn_schedule = 4\nmargin = 0.5\n")); }),
            mg::ErrorKind::InvalidConfig);
}

TEST(Verification, EmptyScheduleIsInvalid) {
  auto c = landau_config({});
  EXPECT_EQ(kind_of([&] { mg::run_verification(c); }), mg::ErrorKind::InvalidConfig);
}

TEST(Verification, ClusterStatsByLadderCounts) {
  const auto s = mg::cluster_stats({{1.0, 1.1, 3.0}, {1.05, 0.95, 3.2}}, {2, 1});
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].count, 4);
  EXPECT_NEAR(s[0].center, 1.025, 1e-15);
  EXPECT_NEAR(s[0].width, 0.15, 1e-15);
  EXPECT_EQ(s[1].count, 2);
  EXPECT_NEAR(s[1].center, 3.1, 1e-15);
}

TEST(Verification, VerdictsFromBands) {
  const std::vector<mg::PredictedInterval> iv{{1, 1.2, 2.8}, {2, 3.2, 4.8}};
  // h = 1 so absolute and rescaled coincide.
  const auto v = mg::verdicts_from_bands({{0.9, 1.1}, {3.0, 3.5}, {5.0, 5.1}}, 1.0, 1.0, iv);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_TRUE(v[0].empty);
  EXPECT_NEAR(v[0].min_distance, 0.1, 1e-15);
  EXPECT_FALSE(v[1].empty);
  EXPECT_EQ(v[1].min_distance, 0.0);
}

TEST(Verification, LandauScheduleAllGapsEmpty) {
  const auto dir = scratch_dir("landau");
  auto c = landau_config({4, 8});
  c.output_dir = dir.string();
  const auto r = mg::run_verification(c);
  EXPECT_FALSE(r.partial);
  EXPECT_TRUE(r.pass);
  ASSERT_TRUE(r.n0.has_value());
  EXPECT_EQ(*r.n0, 4);
  ASSERT_EQ(r.rows.size(), 2u);
  const double spacing = 2.0 * 2.0 * pi;
  for (const auto& row : r.rows) {
    for (const auto& v : row.verdicts) EXPECT_TRUE(v.empty) << row.n << " gap " << v.m;
    ASSERT_EQ(row.clusters.size(), 3u);
    for (const auto& cl : row.clusters) {
      EXPECT_EQ(cl.count, row.n * c.theta_samples * c.theta_samples);
      EXPECT_LE(cl.width, 0.01 * spacing);
    }
  }

  // The report is self-certifying: verdicts follow from the stored bands.
  const auto table = mg::read_csv((dir / "report.csv").string());
  ASSERT_EQ(table.rows.size(), 2u);
  for (size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = r.rows[i];
    const auto bands = mg::bands_from_csv(mg::read_csv((dir / ("bands_N" + std::to_string(row.n) + ".csv")).string()));
    EXPECT_EQ(bands, row.bands);
    const auto again = mg::verdicts_from_bands(bands, row.h, r.ladder.exponent, r.intervals);
    for (size_t g = 0; g < again.size(); ++g) {
      const auto& cells = table.rows[i];
      const std::string idx = std::to_string(g + 1);
      EXPECT_EQ(cells[table.column("gap" + idx + "_empty")], again[g].empty ? "yes" : "no");
      EXPECT_EQ(mg::parse_double("d", cells[table.column("gap" + idx + "_min_distance")]), again[g].min_distance);
    }
  }
  EXPECT_TRUE(fs::exists(dir / "summary.txt"));
  fs::remove_all(dir);
}

TEST(Verification, UpstreamFailureIsPartial) {
  const auto dir = scratch_dir("partial");
  auto c = landau_config({4});
  c.grid_n = 8;
  c.output_dir = dir.string();
  const auto r = mg::run_verification(c);
  EXPECT_TRUE(r.partial);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.failed_n, 4);
  std::ifstream in(dir / "report.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_NE(ss.str().find("PARTIAL,4"), std::string::npos);
  std::ifstream sum(dir / "summary.txt");
  std::stringstream st;
  st << sum.rdbuf();
  EXPECT_NE(st.str().find("verdict PARTIAL"), std::string::npos);
  fs::remove_all(dir);
}
