#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "priorkrylov/io/config.hpp"
#include "priorkrylov/io/output.hpp"

namespace pk = priorkrylov;
namespace io = priorkrylov::io;
using io::Json;

namespace {

Json base() {
  return Json::parse(R"({
    "problem": {"kind": "dct1d", "n": 200, "m": 20},
    "method": {"name": "ps-gks"},
    "seed": 3,
    "output_dir": "out"
  })");
}

}  // namespace

TEST(RunConfig, Defaults) {
  const auto c = io::parse_run_config(base());
  EXPECT_EQ(c.method, "ps-gks");
  EXPECT_EQ(c.solver.max_iter, 150);
  EXPECT_EQ(c.solver.h, 5);
  EXPECT_EQ(c.weights_label, "mm3");
  EXPECT_FALSE(c.weights_given);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_DOUBLE_EQ(c.problem.noise_level, 0.03);
  EXPECT_DOUBLE_EQ(c.solver.dp.tau, 1.01);
  EXPECT_EQ(c.solver.dp.fallback, pk::DpFallback::mu_min);
  EXPECT_EQ(c.solver.basis_mode, pk::BasisMode::none);
}

TEST(RunConfig, CtDefaults) {
  Json j = base();
  j["problem"] = Json::parse(R"({"kind": "ct2d"})");
  const auto c = io::parse_run_config(j);
  EXPECT_EQ(c.problem.n, 64);
  EXPECT_EQ(c.problem.angles, 28);
  EXPECT_EQ(c.solver.max_iter, 100);
  EXPECT_EQ(c.solver.pinv.kind, pk::PinvStrategy::Kind::PcgDct);
}

TEST(RunConfig, UnknownKeysRejected) {
  for (const char* path : {"", "problem", "method", "dp"}) {
    Json j = base();
    std::string p = path;
    if (p.empty()) j["bogus"] = 1;
    else if (p == "dp") j["method"]["dp"] = Json::parse(R"({"tau": 1.01, "mu": 2})");
    else j[p]["bogus"] = 1;
    EXPECT_THROW(io::parse_run_config(j), io::ConfigError) << path;
  }
}

TEST(RunConfig, InvalidValuesRejected) {
  auto expect_bad = [](auto edit) {
    Json j = base();
    edit(j);
    EXPECT_THROW(io::parse_run_config(j), io::ConfigError);
  };
  expect_bad([](Json& j) { j["method"]["name"] = "cgls"; });
  expect_bad([](Json& j) { j.erase("output_dir"); });
  expect_bad([](Json& j) { j["problem"]["m"] = 500; });
  expect_bad([](Json& j) { j["problem"]["noise_level"] = 0.0; });
  expect_bad([](Json& j) { j["method"]["dp"] = Json::parse(R"({"fallback": "mu_max"})"); });
  expect_bad([](Json& j) { j["method"]["dp"] = Json::parse(R"({"mu_min": 10, "mu_max": 1})"); });
  expect_bad([](Json& j) { j["method"]["name"] = "rec-ps-gks"; j["method"]["d_min"] = 9; j["method"]["d_max"] = 9; });
  expect_bad([](Json& j) { j["weights"] = Json::parse(R"({"scheme": "mm", "epsilon": -1})"); });
  expect_bad([](Json& j) { j["weights"] = Json::parse(R"({"scheme": "mm3", "epsilon": 0.1})"); });
  expect_bad([](Json& j) { j["method"]["pinv"] = Json::parse(R"({"strategy": "pcg_dct"})"); });
}

TEST(RunConfig, FallbackAndWeights) {
  Json j = base();
  j["method"]["name"] = "rec-s-gks";
  j["method"]["dp"] = Json::parse(R"({"fallback": "split", "tau": 1.05})");
  j["weights"] = Json::parse(R"({"scheme": "ias", "r": 1, "beta": 2.5})");
  const auto c = io::parse_run_config(j);
  EXPECT_EQ(c.solver.dp.fallback, pk::DpFallback::split);
  EXPECT_DOUBLE_EQ(c.solver.dp.tau, 1.05);
  EXPECT_EQ(c.solver.basis_mode, pk::BasisMode::recycle);
  ASSERT_TRUE(std::holds_alternative<pk::IasWeights>(c.solver.weights));
  EXPECT_DOUBLE_EQ(std::get<pk::IasWeights>(c.solver.weights).beta, 2.5);
  EXPECT_TRUE(c.weights_given);
}

TEST(ReadJson, MissingAndMalformed) {
  EXPECT_THROW(io::read_json_file("/nonexistent/config.json"), io::ConfigError);
  const auto p = std::filesystem::temp_directory_path() / "pk_malformed.json";
  std::ofstream(p) << "{\"problem\": ";
  EXPECT_THROW(io::read_json_file(p.string()), io::ConfigError);
  std::filesystem::remove(p);
}

TEST(Output, RoundTripDigits) {
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(io::fmt17(v)), v);
}
