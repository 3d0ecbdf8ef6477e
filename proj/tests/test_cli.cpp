#include <gtest/gtest.h>

#include <cstdlib>
#include <random>
#include <sstream>

#include "cli_app.hpp"
#include "graph_gen.hpp"

using namespace dynsparse;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args, const std::string& input) {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string stream_text(Vertex n, const std::vector<testgen::Edge>& edges) {
  std::ostringstream s;
  s << "n " << n << "\n";
  for (auto [u, v] : edges) s << "+ " << u << " " << v << "\n";
  return s.str();
}

std::string gnp_fixture(Vertex n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return stream_text(n, testgen::gnp(n, p, rng));
}

}  // namespace

TEST(Cli, EmptyBodyGivesEmptyOutput) {
  const Result r = run({"sparsify", "-"}, "n 5\n");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "");
}

TEST(Cli, SingleEdgeHasUnitWeight) {
  const Result r = run({"sparsify"}, "n 2\n+ 0 1\n");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "0 1 1 1\n");
}

TEST(Cli, ReplaysAreByteIdentical) {
  const std::string fixture = gnp_fixture(16, 0.5, 1);
  const Result a = run({"sparsify", "--profile", "desk", "--seed", "42"}, fixture);
  const Result b = run({"sparsify", "--profile", "desk", "--seed", "42"}, fixture);
  EXPECT_EQ(a.code, 0);
  EXPECT_FALSE(a.out.empty());
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, StatsOfEmptyStream) {
  const Result r = run({"stats"}, "n 4\n");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["m"], 0);
  EXPECT_EQ(j["sparsifier_size"], 0);
}

TEST(Cli, StatsCountsTheNetGraph) {
  const std::string text = "n 6\n+ 0 1\n+ 1 2\n+ 2 3\n- 1 2\n+ 4 5\n";
  const Result r = run({"stats", "--profile", "desk"}, text);
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["m"], 3);
  EXPECT_EQ(j["updates"], 5);
  EXPECT_EQ(j["level_counts"].size(), 7u);
  EXPECT_GT(j["touched_cells_per_update"]["mean"].get<double>(), 0.0);
}

TEST(Cli, MemoryGrowsNearlyLinearlyInN) {
  // Same expected degree at n and 2n.
  auto words = [](Vertex n) {
    const Result r = run({"stats", "--profile", "desk"}, gnp_fixture(n, 8.0 / n, 3));
    EXPECT_EQ(r.code, 0);
    return nlohmann::json::parse(r.out)["memory_words"]["materialized"].get<double>();
  };
  const double small = words(64);
  const double large = words(128);
  const double polylog = std::pow(7.0 / 6.0, 3);
  EXPECT_GT(large / small, 1.0);
  EXPECT_LE(large / small, 2.0 * 2.0 * polylog);
}

TEST(Cli, VerifyInTheRateOneRegime) {
  const Result r = run({"verify"}, gnp_fixture(12, 0.5, 4));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["max_relative_error"], 0.0);
  EXPECT_EQ(j["pass"], true);
  EXPECT_EQ(j["exhaustive"], true);
}

TEST(Cli, VerifyFailureExitsWithFour) {
  const Result r = run({"verify", "--profile", "desk", "--gamma", "1/1000"}, stream_text(16, testgen::complete(16)));
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(nlohmann::json::parse(r.out)["pass"], false);
}

TEST(Cli, StreamViolationExitsWithTwo) {
  const Result r = run({"sparsify", "--checked"}, "n 4\n+ 0 1\n+ 1 0\n");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("stream violation"), std::string::npos);
  EXPECT_EQ(run({"sparsify", "--weighted-bits", "2"}, "n 4 w 3\n+ 0 1 3\n").code, 0);
  EXPECT_EQ(run({"sparsify", "--weighted-bits", "1"}, "n 4 w 3\n+ 0 1 3\n").code, 2);
}

TEST(Cli, PipelineFailureExitsWithThreeAndNamesTheSupernode) {
  const Result r = run({"sparsify", "--profile", "desk", "--alpha", "1/100000"}, stream_text(8, testgen::complete(8)));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("supernode"), std::string::npos);
  const Result best =
      run({"sparsify", "--profile", "desk", "--alpha", "1/100000", "--best-effort"}, stream_text(8, testgen::complete(8)));
  EXPECT_EQ(best.code, 0);
  EXPECT_NE(best.err.find("warning"), std::string::npos);
}

TEST(Cli, MalformedInputAndBadFlagsExitWithOne) {
  EXPECT_EQ(run({"sparsify"}, "n 4\n+ 0 9\n").code, 1);
  EXPECT_EQ(run({"sparsify", "--epsilon", "2"}, "n 4\n").code, 1);
  EXPECT_EQ(run({"sparsify", "--profile", "fast"}, "n 4\n").code, 1);
  EXPECT_EQ(run({}, "n 4\n").code, 1);
  EXPECT_EQ(run({"sparsify", "/nonexistent/stream.txt"}, "").code, 1);
}

TEST(Cli, WeightedStreamPrintsScaledWeights) {
  const Result r = run({"sparsify"}, "n 3 w 7\n+ 0 1 5\n+ 1 2 2\n");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "0 1 5 1\n1 2 2 1\n");
}

TEST(Cli, EnvironmentMirrorsFlags) {
  const std::string fixture = gnp_fixture(16, 0.5, 5);
  const Result flag = run({"sparsify", "--profile", "desk", "--seed", "77"}, fixture);
  ::setenv("DYNSPARSE_SEED", "77", 1);
  ::setenv("DYNSPARSE_PROFILE", "desk", 1);
  const Result env = run({"sparsify"}, fixture);
  ::unsetenv("DYNSPARSE_SEED");
  ::unsetenv("DYNSPARSE_PROFILE");
  EXPECT_EQ(flag.out, env.out);
}
