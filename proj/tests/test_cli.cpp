#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "omit/io.hpp"
#include "omit/omit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("omit_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  /// Runs the CLI; returns its exit status and leaves stdout in out_.
  int run(const std::string& args) {
    const fs::path out = dir_ / "stdout.txt";
    const std::string cmd = std::string(OMIT_CLI_PATH) + " " + args + " > " + out.string() + " 2> " +
                            (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    out_ = slurp(out);
    err_ = slurp(dir_ / "stderr.txt");
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::string out_, err_;
};

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_F(Cli, SpectrumPresetFig2cHasFourDips) {
  ASSERT_EQ(run("spectrum --preset fig2c --method cf --out " + path("s.csv")), 0) << err_;
  const omit::ResponseSpectrum sp = omit::io::read_spectrum_csv(path("s.csv"));
  EXPECT_EQ(sp.x_grid.size(), 20001u);
  EXPECT_EQ(omit::detect_windows(sp).count, 4u);
  EXPECT_TRUE(fs::exists(path("s.csv.manifest.json")));
}

TEST_F(Cli, SpectrumTwoPoints) {
  ASSERT_EQ(run("spectrum --preset fig2a --points 2"), 0) << err_;
  EXPECT_EQ(lines(out_), 3u);
}

TEST_F(Cli, LinearAndCfAgree) {
  ASSERT_EQ(run("spectrum --preset fig2b --method cf --points 3001 --out " + path("cf.csv")), 0);
  ASSERT_EQ(run("spectrum --preset fig2b --method linear --points 3001 --out " + path("lin.csv")), 0);
  const auto a = omit::io::read_spectrum_csv(path("cf.csv"));
  const auto b = omit::io::read_spectrum_csv(path("lin.csv"));
  ASSERT_EQ(a.eps_T.size(), b.eps_T.size());
  for (std::size_t k = 0; k < a.eps_T.size(); ++k) EXPECT_LT(std::abs(a.eps_T[k] - b.eps_T[k]), 1e-9);
}

TEST_F(Cli, DeterministicOutput) {
  ASSERT_EQ(run("spectrum --preset fig4c4 --points 4001 --out " + path("a.csv")), 0);
  ASSERT_EQ(run("spectrum --preset fig4c4 --points 4001 --out " + path("b.csv")), 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
}

TEST_F(Cli, ManifestRerunReproduces) {
  ASSERT_EQ(run("spectrum --preset fig2b --method full --points 1001 --out " + path("a.csv")), 0);
  const json m = omit::io::read_json_file(path("a.csv.manifest.json"));
  EXPECT_EQ(m["subcommand"], "spectrum");
  EXPECT_EQ(m["method"], "full");
  EXPECT_EQ(m["grid"]["points"], 1001);
  EXPECT_EQ(m["outputs"][0], path("a.csv"));
  EXPECT_TRUE(m.contains("wall_time_s"));
  EXPECT_EQ(m["version"], "1.0.0");
  ASSERT_EQ(run("rerun " + path("a.csv.manifest.json") + " --out " + path("b.csv")), 0) << err_;
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_TRUE(fs::exists(path("b.csv.manifest.json")));
}

TEST_F(Cli, WindowsPresets) {
  ASSERT_EQ(run("windows --preset fig4c --out " + path("w.json")), 0) << err_;
  EXPECT_EQ(omit::io::read_json_file(path("w.json"))["count"], 5);
  EXPECT_NE(out_.find("count: 5"), std::string::npos);
  ASSERT_EQ(run("windows --preset fig2a"), 0);
  EXPECT_NE(out_.find("count: 2"), std::string::npos);
}

TEST_F(Cli, WindowsFromFlatCsv) {
  std::ofstream f(path("flat.csv"));
  f << "x_over_kappaN,re_eT,im_eT,abs_eT\n";
  for (int k = 0; k < 100; ++k) f << (k * 0.01) << ",2,0,2\n";
  f.close();
  ASSERT_EQ(run("windows --spectrum " + path("flat.csv")), 0) << err_;
  EXPECT_NE(out_.find("count: 0"), std::string::npos);
}

TEST_F(Cli, InvalidConfigExitsTwo) {
  json j = omit::io::config_to_json(omit::presets::chain(2));
  j["kappa"][0] = -1.0;
  std::ofstream(path("bad.json")) << j.dump();
  EXPECT_EQ(run("spectrum --config " + path("bad.json")), 2);
  EXPECT_NE(err_.find("kappa must be positive"), std::string::npos);
  j = omit::io::config_to_json(omit::presets::chain(2));
  j["unexpected"] = 1;
  std::ofstream(path("bad2.json")) << j.dump();
  EXPECT_EQ(run("spectrum --config " + path("bad2.json")), 2);
}

TEST_F(Cli, SolverErrorExitsThree) {
  json j = omit::io::config_to_json(omit::presets::chain(2));
  j["detuning_mode"] = {{"Explicit", {{"Delta", {51.8, 51.8}}, {"Delta_a", 0.0}}}};
  std::ofstream(path("explicit.json")) << j.dump();
  EXPECT_EQ(run("spectrum --method cf --config " + path("explicit.json")), 3);
}

TEST_F(Cli, SweepCouplingWidthIncreases) {
  ASSERT_EQ(run("sweep --preset fig2c --param drive_mode.G_mag --values 8,10,12 --out " + path("g.csv")), 0)
      << err_;
  std::istringstream in(slurp(path("g.csv")));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "param_value,count,central_feature,central_width,error");
  double prev = 0.0;
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cols.push_back(cell);
    ASSERT_GE(cols.size(), 4u) << line;
    const double w = std::stod(cols[3]);
    EXPECT_GT(w, prev);
    prev = w;
    ++rows;
  }
  EXPECT_EQ(rows, 3);
}

TEST_F(Cli, SweepAtomPosition) {
  ASSERT_EQ(run("sweep --preset fig4a1 --param atom.position --values 1,2,3,4"), 0) << err_;
  std::istringstream in(out_);
  std::string line;
  std::getline(in, line);
  std::vector<int> counts;
  while (std::getline(in, line)) counts.push_back(std::stoi(line.substr(line.find(',') + 1)));
  EXPECT_EQ(counts, (std::vector<int>{4, 5, 4, 5}));
}

TEST_F(Cli, SweepEmptyRangeIsHeaderOnly) {
  ASSERT_EQ(run("sweep --preset fig2a --param gamma_m --range 0 1 0"), 0) << err_;
  EXPECT_EQ(out_, "param_value,count,central_feature,central_width,error\n");
}

TEST_F(Cli, SweepAllFailingExitsFour) {
  EXPECT_EQ(run("sweep --preset fig2a --param kappa[0] --values -1,-2"), 4);
  EXPECT_NE(out_.find("kappa must be positive"), std::string::npos);
}

TEST_F(Cli, SweepPartialFailureContinues) {
  ASSERT_EQ(run("sweep --preset fig2a --param kappa[0] --values -1,0.027"), 0);
  EXPECT_NE(out_.find(",2,AbsorptivePeak,"), std::string::npos) << out_;
  EXPECT_NE(out_.find("kappa must be positive"), std::string::npos) << out_;
}

TEST_F(Cli, SteadyAndTimedomain) {
  ASSERT_EQ(run("steady --preset fig2a-drive"), 0) << err_;
  const json st = json::parse(out_);
  EXPECT_LT(st["residual_norm"].get<double>(), 1e-10);
  EXPECT_EQ(run("steady --preset fig2a"), 2);
  ASSERT_EQ(run("timedomain --preset fig2a --x 0.5 --periods 50 --stride 50 --out " + path("t.csv")), 0) << err_;
  const json summary = json::parse(out_);
  ASSERT_TRUE(summary["eps_T"].is_array());
  const auto s = omit::normalize(omit::presets::chain(2));
  const auto f = omit::epsilon_T_full(0.5 * s.kappa_n(), s, 1.0).eps_T;
  const omit::cplx e{summary["eps_T"][0].get<double>(), summary["eps_T"][1].get<double>()};
  EXPECT_LT(std::abs(e - f) / std::abs(f), 0.01);
  EXPECT_EQ(slurp(path("t.csv")).substr(0, 51), "t_us,re_c1,im_c1,re_c2,im_c2,re_b,im_b,re_sm,im_sm\n");
  EXPECT_EQ(run("timedomain --preset fig2a --mode nonlinear"), 2);
}
