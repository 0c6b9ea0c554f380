#include "../tools/commands.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using qpart::cli::run_cli;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qpart");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(QPART_DATA_DIR) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("qpart_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({"run", data("ghz3.qasm"), "--verify"}).code, 0);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({"run", data("ghz3.qasm"), "--ranks", "3"}).code, 1);
  EXPECT_EQ(cli({"run", write_temp("bad.qasm", "qreg q[2]; h q[5];")}).code, 2);
  EXPECT_EQ(cli({"run", write_temp("syntax.qasm", "qreg q[2]; h q[0]")}).code, 2);
  EXPECT_EQ(cli({"run", data("does_not_exist.qasm")}).code, 2);
  EXPECT_EQ(cli({"partition", write_temp("swap.qasm", "qreg q[3]; swap q[0],q[2];"), "--hierarchy", "1"}).code, 3);
  EXPECT_EQ(cli({"partition", data("ghz3.qasm"), "--hierarchy", "2,3"}).code, 3);
}

TEST(Cli, VerifyReportsOk) {
  EXPECT_EQ(qpart::cli::kVerifyFailed, 4);
  const auto r = cli({"run", data("qft10.qasm"), "--ranks", "8", "--verify"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(nlohmann::json::parse(r.out).at("verify").at("ok").get<bool>());
}

TEST(Cli, Ghz3Partition) {
  const auto r = cli({"partition", data("ghz3.qasm"), "--ranks", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("num_leaves").get<int>(), 2);
  EXPECT_EQ(j.at("num_exchanges").get<int>(), 1);
  EXPECT_EQ(j.at("hierarchy"), nlohmann::json::array({2}));
}

TEST(Cli, Ghz3VerifyText) {
  const auto r = cli({"run", data("ghz3.qasm"), "--ranks", "2", "--verify", "--format", "text"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("max deviation < 1e-12, OK"), std::string::npos) << r.out;
}

TEST(Cli, GoldenHistogram) {
  const auto r = cli({"run", data("qft10.qasm"), "--ranks", "8", "--shots", "1000", "--seed", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(std::string(QPART_GOLDEN_DIR) + "/qft10_r8_s1000_seed7.json"));
}

TEST(Cli, ByteIdenticalRuns) {
  const std::vector<std::string> args{"run", data("dj12.qasm"), "--hierarchy", "10,6", "--shots", "500", "--seed", "11"};
  const auto a = cli(args), b = cli(args);
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto c = cli({"run", data("dj12.qasm"), "--hierarchy", "10,6", "--shots", "500", "--seed", "12"});
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, OutFlag) {
  const auto path = (std::filesystem::temp_directory_path() / "qpart_test_out.json").string();
  const auto r = cli({"partition", data("ghz3.qasm"), "--ranks", "2", "--out", path});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(path)).at("num_exchanges").get<int>(), 1);
}

TEST(Cli, StatsExchangeSizes) {
  const auto r = cli({"stats", data("ghz3.qasm"), "--ranks", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j.at("exchanges").size(), 1u);
  EXPECT_EQ(j.at("exchanges")[0].at("amplitudes_per_pair").get<int>(), 2);
  EXPECT_EQ(j.at("bytes_moved").get<int>(), 64);
}

TEST(Cli, StatsDiagonalOnlyMovesNothing) {
  const auto path = write_temp("diag.qasm", "qreg q[6]; rz(0.3) q[5]; cz q[0],q[5]; cp(0.2) q[1],q[4]; p(1) q[4];");
  const auto j = nlohmann::json::parse(cli({"stats", path, "--ranks", "8"}).out);
  EXPECT_EQ(j.at("bytes_moved").get<int>(), 0);
  EXPECT_TRUE(j.at("exchanges").empty());
}

TEST(Cli, StatsSingleRankHasNoExchangeTime) {
  const auto j = nlohmann::json::parse(cli({"stats", data("qft10.qasm")}).out);
  EXPECT_EQ(j.at("exchange_seconds").get<double>(), 0.0);
  EXPECT_EQ(j.at("ranks").get<int>(), 1);
}

TEST(Cli, BenchSmallSizesVerify) {
  const auto r = cli({"bench", "--family", "ghz", "--qubits", "4-12"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = nlohmann::json::parse(r.out).at("rows");
  EXPECT_EQ(rows.size(), 9u);
  for (const auto& row : rows) EXPECT_TRUE(row.at("ok").get<bool>()) << row.dump();
}

TEST(Cli, BenchUnknownFamily) {
  const auto r = cli({"bench", "--family", "nope", "--qubits", "4"});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, EmptyCircuit) {
  const auto r = cli({"run", data("empty.qasm"), "--shots", "10"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(cli({"partition", data("empty.qasm")}).code, 0);
}

TEST(Cli, GenerateRoundTrips) {
  const auto r = cli({"generate", "--family", "qft", "--qubits", "10"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, slurp(data("qft10.qasm")));
}

TEST(Cli, RangeParsing) {
  EXPECT_EQ(qpart::cli::parse_qubit_range("30-33"), (std::vector<int>{30, 31, 32, 33}));
  EXPECT_EQ(qpart::cli::parse_qubit_range("4,6-7"), (std::vector<int>{4, 6, 7}));
  EXPECT_THROW(qpart::cli::parse_qubit_range("7-4"), qpart::cli::UsageError);
  EXPECT_EQ(qpart::cli::parse_int_list("25,15,5"), (std::vector<int>{25, 15, 5}));
  EXPECT_THROW(qpart::cli::parse_int_list("a"), qpart::cli::UsageError);
}

TEST(Cli, HierarchyResolution) {
  qpart::cli::RunConfig c;
  EXPECT_EQ(qpart::cli::resolve_hierarchy(c, 10), std::vector<int>{10});
  c.ranks = 4;
  EXPECT_EQ(qpart::cli::resolve_hierarchy(c, 10), std::vector<int>{8});
  c.hierarchy = {7, 3};
  EXPECT_THROW(qpart::cli::resolve_hierarchy(c, 10), qpart::cli::UsageError);
  c.hierarchy = {8, 3};
  EXPECT_EQ(qpart::cli::resolve_hierarchy(c, 10), (std::vector<int>{8, 3}));
}
