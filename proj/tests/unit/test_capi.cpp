#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "qcml/qcml.h"

using json = nlohmann::json;

namespace {

struct Ctx {
  qcml_context* c = qcml_context_new();
  ~Ctx() { qcml_context_free(c); }
};

json run_ok(Ctx& ctx, const json& cfg) {
  const qcml_status st = qcml_run(ctx.c, cfg.dump().c_str());
  EXPECT_EQ(st, QCML_OK) << qcml_error_kind(ctx.c) << ": " << qcml_error_message(ctx.c);
  return json::parse(qcml_result_json(ctx.c));
}

}  // namespace

TEST(CApi, SnakeThreshold) {
  Ctx ctx;
  const json r = run_ok(ctx, {{"command", "snake"}, {"action", "threshold"}, {"params", {{"s", 0.5}}}});
  EXPECT_EQ(r["schema"], 1);
  EXPECT_DOUBLE_EQ(r["outputs"]["value"].get<double>(), 0.5);
}

TEST(CApi, ModulusBracketCsv) {
  Ctx ctx;
  run_ok(ctx, {{"command", "modulus"},
               {"action", "bracket"},
               {"params", {{"gauge", {{"kind", "Exponential"}, {"p", 1}}}, {"I", 6.283185}, {"m", 0}, {"n", 40}}}});
  std::istringstream csv(qcml_result_csv(ctx.c));
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  EXPECT_EQ(header, "method,r,R,lower,upper,value,lower_inv,upper_inv,gap_inv");
  std::vector<std::string> cells;
  std::stringstream ss(row);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  ASSERT_EQ(cells.size(), 9u);
  EXPECT_LE(std::stod(cells[3]), std::stod(cells[4]));
  EXPECT_LE(std::stod(cells[8]), 1.0);
  // 17 significant digits
  EXPECT_GE(cells[3].size(), 17u);
}

TEST(CApi, ErrorClassesAndExitCodes) {
  Ctx ctx;
  EXPECT_EQ(qcml_run(ctx.c, R"({"command":"bogus"})"), QCML_ERR_CONFIG);
  EXPECT_STREQ(qcml_error_kind(ctx.c), "ConfigError");
  EXPECT_EQ(qcml_run(ctx.c, "not json"), QCML_ERR_CONFIG);
  EXPECT_EQ(qcml_run(ctx.c, R"({"command":"snake","action":"threshold","params":{"s":0.5,"extra":1}})"), QCML_ERR_CONFIG);
  EXPECT_EQ(qcml_run(ctx.c, R"({"command":"snake","action":"threshold","params":{"s":1.5}})"), QCML_ERR_DOMAIN);
  EXPECT_EQ(qcml_run(ctx.c,
                     R"({"command":"snake","action":"crossover","params":{"profile":"Power","s":0.5,"alpha":0.5,"r_min":0.001,"K":1,"p":0.4}})"),
            QCML_ERR_DOMAIN);
  EXPECT_STREQ(qcml_error_kind(ctx.c), "NoCrossoverError");
  EXPECT_EQ(qcml_run(nullptr, "{}"), QCML_ERR_INVALID_ARGUMENT);
}

TEST(CApi, LogScaleRadiusProtocol) {
  Ctx ctx;
  const json r = run_ok(ctx, {{"command", "map"},
                              {"action", "winding"},
                              {"params", {{"map", {{"eta", {{"kind", "identity"}}}, {"gamma", 2}}}, {"r", {{"log_inv", 1e6}}}}}});
  EXPECT_NEAR(r["outputs"]["winding"].get<double>(), 2e6, 1e-6);
}

TEST(CApi, DeterministicReports) {
  const json cfg = {{"command", "threepoint"},
                    {"action", "check"},
                    {"seed", 5},
                    {"params", {{"curve", {{"kind", "slit"}, {"arc", 256}, {"slit", 64}}}, {"mode", "jittered"}, {"samples", 200}}}};
  Ctx a, b;
  run_ok(a, cfg);
  run_ok(b, cfg);
  EXPECT_STREQ(qcml_result_json(a.c), qcml_result_json(b.c));
}

TEST(CApi, WritesOutputFileAndReadsPgmMask) {
  const std::string mask = testing::TempDir() + "qcml_mask.pgm";
  {
    std::ofstream f(mask);
    f << "P2\n# square\n6 4\n255\n";
    for (int y = 0; y < 4; ++y) f << "64 255 255 255 255 128\n";
  }
  const std::string out = testing::TempDir() + "qcml_out.csv";
  Ctx ctx;
  run_ok(ctx, {{"command", "grid"},
               {"action", "capacity"},
               {"format", "csv"},
               {"output", out},
               {"params", {{"domain", {{"pgm", mask}, {"h", 0.25}}}}}});
  std::ifstream f(out);
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(ss.str(), std::string(qcml_result_csv(ctx.c)));
  const json r = json::parse(qcml_result_json(ctx.c));
  EXPECT_NEAR(r["outputs"]["energy"].get<double>(), 4.0 / 5.0, 1e-8);
  std::remove(mask.c_str());
  std::remove(out.c_str());
}
