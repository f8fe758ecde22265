#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace cli = magnetic_gaps::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "magnetic-gaps");
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(MAGNETIC_GAPS_TEST_DATA) + "/" + name; }

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST(Cli, NoSubcommandIsUsageError) { EXPECT_EQ(run({}).code, cli::kExitUsage); }

TEST(Cli, UnknownFlagIsUsageError) {
  const auto r = run({"kappa", "--k", "2", "--bogus"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST(Cli, HelpExitsCleanly) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("verify-gaps"), std::string::npos);
}

TEST(Cli, Kappa) {
  const auto r = run({"kappa", "--k", "2"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_EQ(r.out, "kappa_star 2/9 0.22222222222222221 s_star 1/18 0.055555555555555552\n");
  EXPECT_EQ(r.err.rfind("# magnetic-gaps", 0), 0u);
  EXPECT_EQ(run({"kappa", "--k", "-1"}).code, cli::kExitUsage);
}

TEST(Cli, ZerosOfTestField) {
  const auto r = run({"zeros", "--field", data("test_field.txt")});
  ASSERT_EQ(r.code, cli::kExitOk);
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[0], "x,y,k,comp_lower,comp_upper");
  EXPECT_EQ(l[1].rfind("0,0,2,", 0), 0u);
  EXPECT_EQ(l[2].rfind("0.5,0.5,2,", 0), 0u);
}

TEST(Cli, MissingFieldFileIsUsageError) {
  EXPECT_EQ(run({"zeros", "--field", "/nonexistent.txt"}).code, cli::kExitUsage);
}

TEST(Cli, Transfer) {
  const auto ok = run({"transfer", "--params", data("transfer_params.txt"), "--a1", "2", "--b1", "5"});
  EXPECT_EQ(ok.code, cli::kExitOk);
  EXPECT_EQ(ok.out, "2.4643255523134644 3.9398513959532497 valid:yes\n");
  EXPECT_EQ(run({"transfer", "--params", data("transfer_params.txt"), "--a1", "5", "--b1", "2"}).code,
            cli::kExitUsage);
}

TEST(Cli, NonIntegerFluxIsNumericFailure) {
  const auto r = run({"bloch-spectrum", "--field", data("constant_field.txt"), "--h", "0.3", "--cutoff", "3"});
  EXPECT_EQ(r.code, cli::kExitNumeric);
  EXPECT_NE(r.err.find("NonIntegerFlux"), std::string::npos);
}

TEST(Cli, BandsNeedInputs) {
  EXPECT_EQ(run({"bands", "--field", data("constant_field.txt"), "--h", "0.25"}).code, cli::kExitUsage);
}

TEST(Cli, SpectrumIsByteDeterministicAndReplays) {
  const std::vector<std::string> args{"bloch-spectrum", "--field", data("constant_field.txt"), "--h", "0.25",
                                      "--cutoff", "6", "--theta-grid", "2"};
  const auto a = run(args);
  const auto b = run(args);
  ASSERT_EQ(a.code, cli::kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(lines(a.out).size(), 1u + 4u * 8u);

  const auto dir = fs::temp_directory_path() / "magnetic_gaps_cli_replay";
  fs::create_directories(dir);
  const auto spec = (dir / "spectrum.csv").string();
  std::ofstream(spec) << a.out;
  const auto live = run({"bands", "--field", data("constant_field.txt"), "--h", "0.25", "--cutoff", "6",
                         "--theta-grid", "2"});
  const auto replayed = run({"bands", "--replay", spec, "--cutoff", "6"});
  ASSERT_EQ(live.code, cli::kExitOk);
  ASSERT_EQ(replayed.code, cli::kExitOk);
  EXPECT_EQ(live.out, replayed.out);

  const auto bands_path = (dir / "bands.csv").string();
  std::ofstream(bands_path) << live.out;
  EXPECT_EQ(run({"bands", "--replay", bands_path}).out, live.out);
  const auto gaps = run({"bands", "--replay", bands_path, "--exponent", "1", "--h", "0.25", "--cutoff", "6"});
  EXPECT_EQ(gaps.code, cli::kExitOk);
  EXPECT_GE(lines(gaps.out).size(), 3u);
  fs::remove_all(dir);
}

TEST(Cli, VerifyGapsExitCodes) {
  const auto r = run({"verify-gaps", "--config", data("verify_short.cfg")});
  EXPECT_EQ(r.code, cli::kExitGapViolation);
  EXPECT_NE(r.out.find("N=4 gap1=occupied"), std::string::npos);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
  EXPECT_EQ(run({"verify-gaps", "--config", "/nonexistent.cfg"}).code, cli::kExitUsage);
}
