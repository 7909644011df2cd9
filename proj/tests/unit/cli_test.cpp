#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_harness.hpp"

using namespace fractal_lab;

namespace {

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fractal_lab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int status = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

}  // namespace

TEST(Cli, DimOnCantor) {
  auto r = invoke({"dim", "--space", "cantor:8", "--delta", "0.333"});
  ASSERT_EQ(r.status, 0) << r.err;
  Json j = Json::parse(r.out);
  EXPECT_EQ(j["schema"], "fractal_lab.dimension/1");
  EXPECT_NEAR(j["result"]["estimate"]["slope"].get<double>(), 0.6309, 0.05);
  EXPECT_FALSE(j["config"].contains("out"));
}

TEST(Cli, CertifySnowflakeDiverges) {
  auto r = invoke({"certify", "--space", "grid:1025", "--map", "snowflake_id:0.5", "--p", "2", "--alpha", "0.5"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["result"]["verdict"], "diverging");
}

TEST(Cli, VerifyInterval) {
  auto r = invoke({"verify", "--space", "grid:1000", "--delta", "1/24", "--c0", "1", "--C0", "2"});
  ASSERT_EQ(r.status, 0) << r.err;
  Json j = Json::parse(r.out);
  EXPECT_TRUE(j["result"]["passed"].get<bool>());
  EXPECT_TRUE(j["result"]["verification"]["violations"].empty());
}

TEST(Cli, RoundedDeltaViolatesConstraint) {
  auto r = invoke({"verify", "--space", "grid:1000", "--delta", "0.0417", "--c0", "1", "--C0", "2"});
  EXPECT_EQ(r.status, 1);
  Json err = Json::parse(r.err);
  EXPECT_EQ(err["error"], "invalid-input");
  EXPECT_NE(err["message"].get<std::string>().find("12*C0*delta"), std::string::npos);
}

TEST(Cli, Errors) {
  EXPECT_EQ(invoke({"dim"}).status, 1);
  EXPECT_EQ(invoke({"dim", "--space", "nope.csv"}).status, 1);
  EXPECT_EQ(invoke({"dim", "--space", "grid:100", "--format", "xml"}).status, 1);
  EXPECT_EQ(invoke({"certify", "--space", "grid:100", "--map", "power:3"}).status, 1);
  EXPECT_EQ(invoke({}).status, 1);
  EXPECT_EQ(invoke({"--help"}).status, 0);
}

TEST(Cli, DistortSobolevViolationExitsTwo) {
  auto r = invoke({"distort", "--space", "grid:60:2", "--bound", "sobolev", "--p", "3", "--Q", "1"});
  EXPECT_EQ(r.status, 2) << r.err;
  EXPECT_TRUE(Json::parse(r.out)["result"]["hypothesis_violation"].get<bool>());
}

TEST(Cli, ScheduleParsing) {
  auto s = cli::parse_schedule("0.5,1/2,4");
  EXPECT_EQ(s.radii().size(), 4u);
  EXPECT_DOUBLE_EQ(s.radii()[3], 0.0625);
  EXPECT_THROW(cli::parse_schedule("1,2,3"), InvalidInput);
  EXPECT_THROW(cli::parse_schedule("1,0.5"), InvalidInput);
}

TEST(Cli, ReplayIsByteIdentical) {
  auto dir = std::filesystem::temp_directory_path() / "fractal_lab_cli_test";
  std::filesystem::create_directories(dir);
  auto read = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream b;
    b << in.rdbuf();
    return b.str();
  };
  std::vector<std::vector<std::string>> runs{
      {"gen", "--space", "cantor:4", "--format", "csv"},
      {"cubes", "--space", "grid:200"},
      {"dim", "--space", "grid:500", "--format", "csv"},
      {"certify", "--space", "grid:300", "--map", "identity", "--p", "3", "--schedule", "0.25,0.5,4"},
  };
  int i = 0;
  for (auto args : runs) {
    auto a = dir / ("a" + std::to_string(i) + ".out");
    auto b = dir / ("b" + std::to_string(i) + ".out");
    ++i;
    args.push_back("--out");
    args.push_back(a.string());
    ASSERT_EQ(invoke(args).status, 0) << args[0];
    ASSERT_EQ(invoke({"--config", a.string(), "--out", b.string()}).status, 0) << args[0];
    EXPECT_EQ(read(a), read(b)) << args[0];
  }
  std::filesystem::remove_all(dir);
}

TEST(Cli, ConfigExcludesSubcommandFlags) {
  auto r = invoke({"--config", "x.json", "dim", "--space", "grid:10"});
  EXPECT_EQ(r.status, 1);
}
