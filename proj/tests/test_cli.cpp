#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "backflow/cli/config.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("backflow_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const json& j) {
  const auto p = scratch() / (name + ".json");
  std::ofstream(p) << j.dump(2);
  return p;
}

int run(const std::string& command, const fs::path& config, const fs::path& out) {
  const std::string cmd = std::string(BACKFLOW_CLI_PATH) + " " + command + " --config " + config.string() +
                          " --out " + out.string() + " 2>" + (scratch() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::istringstream in(slurp(p));
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

json summary(const fs::path& out) { return json::parse(slurp(out / "summary.json")); }

json small_spectrum() {
  return {{"command", "spectrum"},
          {"grid", {{"u_max", 8}, {"panel_width_u2", 4}, {"points_per_panel", 8}, {"u_split", 8}}},
          {"a", 0}};
}

}  // namespace

TEST(Cli, VersionFlag) {
  const int status = std::system((std::string(BACKFLOW_CLI_PATH) + " --version > /dev/null").c_str());
  EXPECT_EQ(WEXITSTATUS(status), 0);
}

TEST(Cli, UnknownKeyIsConfigError) {
  auto j = small_spectrum();
  j["grid"]["panel_widht_u2"] = 4;
  EXPECT_EQ(run("spectrum", write_config("typo", j), scratch() / "typo"), 1);
  EXPECT_NE(slurp(scratch() / "stderr.txt").find("panel_widht_u2"), std::string::npos);
}

TEST(Cli, CommandMismatchIsConfigError) {
  EXPECT_EQ(run("gaussian", write_config("mismatch", small_spectrum()), scratch() / "mismatch"), 1);
}

TEST(Cli, MissingConfigIsConfigError) {
  EXPECT_EQ(run("spectrum", scratch() / "does_not_exist.json", scratch() / "missing"), 1);
}

TEST(Cli, UnknownCommandIsRejected) {
  EXPECT_EQ(run("spectra", write_config("unknown", small_spectrum()), scratch() / "unknown"), 1);
}

TEST(Cli, ZeroAbsorberIsRejected) {
  const json j{{"command", "measure"},
               {"state", {{"components", {{{"amplitude", 1}, {"momentum", 1}}}}, {"sigma", 2}, {"center", 0}}},
               {"grid", {{"x_min", -400}, {"x_max", 200}, {"n", 4096}}},
               {"start_time", -10},
               {"dt", 0.01},
               {"t_final", 20},
               {"V0", {0.1, 0.0}}};
  EXPECT_EQ(run("measure", write_config("v0zero", j), scratch() / "v0zero"), 1);
  EXPECT_NE(slurp(scratch() / "stderr.txt").find("V0"), std::string::npos);
}

TEST(Cli, OneNodeSpectrum) {
  const json j{{"command", "spectrum"},
               {"grid", {{"u_max", 1}, {"panels", 1}, {"points_per_panel", 1}}},
               {"flux_identity", false}};
  const auto out = scratch() / "one";
  ASSERT_EQ(run("spectrum", write_config("one", j), out), 0);
  const auto ev = lines(out / "eigenvalues.csv");
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(summary(out)["results"]["resolution"]["nodes"], 1);
}

TEST(Cli, SpectrumSummaryContents) {
  const auto out = scratch() / "spec";
  ASSERT_EQ(run("spectrum", write_config("spec", small_spectrum()), out), 0);
  const auto s = summary(out);
  EXPECT_EQ(s["command"], "spectrum");
  EXPECT_EQ(s["config"], small_spectrum());
  EXPECT_TRUE(s.contains("version"));
  EXPECT_TRUE(s.contains("wall_clock_seconds"));
  const auto& r = s["results"];
  EXPECT_LT(r["lambda_min"].get<double>(), -0.03);
  EXPECT_TRUE(r["bounds"]["ok"].get<bool>());
  EXPECT_LE(r["eigen_residual"].get<double>(), 1e-6);
}

TEST(Cli, CsvFormat) {
  const auto out = scratch() / "spec";
  ASSERT_EQ(run("spectrum", write_config("spec", small_spectrum()), out), 0);
  for (const char* f : {"eigenvalues.csv", "phi_max.csv"}) {
    const auto text = slurp(out / f);
    EXPECT_EQ(text.find('\r'), std::string::npos);
    ASSERT_FALSE(text.empty());
    EXPECT_EQ(text.back(), '\n');
    const auto rows = lines(out / f);
    ASSERT_GE(rows.size(), 2u);
    EXPECT_NE(rows[0].find('['), std::string::npos) << "header carries units";
    for (const auto& row : rows) EXPECT_NE(row.back(), ',') << f;
  }
  // 17 significant digits round-trip the stored double.
  const auto rows = lines(out / "eigenvalues.csv");
  const std::string first = rows[1].substr(rows[1].find(',') + 1);
  EXPECT_EQ(std::stod(first), summary(out)["results"]["lambda_min"].get<double>());
}

TEST(Cli, DeterministicOutputs) {
  const auto cfg = write_config("det", small_spectrum());
  const auto a = scratch() / "det_a";
  const auto b = scratch() / "det_b";
  ASSERT_EQ(run("spectrum", cfg, a), 0);
  ASSERT_EQ(run("spectrum", cfg, b), 0);
  for (const char* f : {"eigenvalues.csv", "phi_max.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  auto sa = summary(a);
  auto sb = summary(b);
  sa.erase("wall_clock_seconds");
  sb.erase("wall_clock_seconds");
  EXPECT_EQ(sa.dump(), sb.dump());
}

TEST(Cli, SweepAtZeroMatchesSpectrum) {
  const auto spec = scratch() / "spec0";
  ASSERT_EQ(run("spectrum", write_config("spec0", small_spectrum()), spec), 0);
  json sw{{"command", "sweep-smearing"}, {"grid", small_spectrum()["grid"]}, {"a_values", {2, 0, 1}}};
  const auto out = scratch() / "sweep";
  ASSERT_EQ(run("sweep-smearing", write_config("sweep", sw), out), 0);
  const auto rows = lines(out / "lambda_a.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "a[dimensionless],lambda_min[dimensionless],a_squared_times_lambda[dimensionless]");
  const auto s = summary(out)["results"];
  EXPECT_EQ(s["points"][0]["a"].get<double>(), 0.0);
  EXPECT_EQ(s["points"][0]["lambda_min"].get<double>(), summary(spec)["results"]["lambda_min"].get<double>());
  EXPECT_TRUE(s["monotone_non_decreasing"].get<bool>());
}

TEST(Cli, SingleGaussianHasNoWindows) {
  const json j{{"command", "gaussian"},
               {"components", {{{"amplitude", 1}, {"momentum", 1.5}}}},
               {"sigma", 5},
               {"t_min", 0},
               {"t_max", 20},
               {"dt", 0.05},
               {"prob_left_dt", 0.5}};
  const auto out = scratch() / "single";
  ASSERT_EQ(run("gaussian", write_config("single", j), out), 0);
  EXPECT_EQ(lines(out / "windows.csv").size(), 1u);
  const auto r = summary(out)["results"];
  EXPECT_EQ(r["window_count"], 0);
  EXPECT_TRUE(r["most_negative_window"].is_null());
}

TEST(Cli, AnalyticEmptyWindowHasZeroFlux) {
  const json j{{"command", "analytic-state"}, {"a", 0.6}, {"b", 2.8}, {"flux_window", {0.3, 0.3}}, {"ds", 0.01}};
  const auto out = scratch() / "analytic";
  ASSERT_EQ(run("analytic-state", write_config("analytic", j), out), 0);
  EXPECT_EQ(summary(out)["results"]["flux"]["flux"].get<double>(), 0.0);
  EXPECT_TRUE(fs::exists(out / "phi.csv"));
  EXPECT_TRUE(fs::exists(out / "current.csv"));
}

TEST(Cli, MeasureSmokeRun) {
  const json j{{"command", "measure"},
               {"state", {{"components", {{{"amplitude", 1}, {"momentum", 1}}}}, {"sigma", 2}, {"center", 0}}},
               {"grid", {{"x_min", -400}, {"x_max", 200}, {"n", 4096}}},
               {"start_time", -10},
               {"dt", 0.01},
               {"t_final", 60},
               {"V0", {0.2}},
               {"record_every", 2}};
  const auto out = scratch() / "measure";
  ASSERT_EQ(run("measure", write_config("measure", j), out), 0);
  const auto rows = lines(out / "arrival.csv");
  ASSERT_GT(rows.size(), 100u);
  double peak = 0.0;
  double lowest = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double v = std::stod(rows[i].substr(rows[i].rfind(',') + 1));
    peak = std::max(peak, v);
    lowest = std::min(lowest, v);
  }
  EXPECT_GT(peak, 0.0);
  EXPECT_GE(lowest, -1e-6 * peak);
  for (const char* f : {"survival.csv", "deconvolved.csv", "summary.json"}) EXPECT_TRUE(fs::exists(out / f)) << f;
}

TEST(Cli, ShippedConfigsParse) {
  for (const auto& e : fs::directory_iterator(BACKFLOW_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    std::string name;
    EXPECT_NO_THROW(backflow::cli::parse_config(backflow::cli::load_json(e.path()), &name)) << e.path();
    EXPECT_EQ(e.path().stem().string().substr(0, 5), name.substr(0, 5)) << e.path();
  }
}
