#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "support.hpp"

using namespace hexkerr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hexkerr_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Config, Defaults) {
  const RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_FALSE(c.delta.has_value());
  EXPECT_EQ(c.cutoffs, (Cutoffs{2, 1, 1, 1, 1, 1, 1}));
  ASSERT_EQ(c.extra_cutoffs.size(), 1u);
  EXPECT_GE(1.0 / c.ramp_rate, 1e4);
}

TEST(Config, ParsesKeysAndComments) {
  std::istringstream in(R"(# a comment
drive = 1.25   # trailing
delta = 0.5
observable = X
index = 3
angles = phi, phi+0.05 , opt
cutoffs = 2, 2, 2, 2, 2, 2, 2
extra_cutoffs = 3,1,1,1,1,1,1 ; 4,1,1,1,1,1,1
total_cutoff = 5
seed = 42

out_dir = results/a
)");
  const RunConfig c = parse_config(in);
  EXPECT_EQ(c.drive, 1.25);
  EXPECT_EQ(c.delta, 0.5);
  EXPECT_EQ(c.observable, Observable::X);
  EXPECT_EQ(c.index, 3);
  EXPECT_EQ(c.angles, "phi, phi+0.05 , opt");
  EXPECT_EQ(c.cutoffs[6], 2);
  ASSERT_EQ(c.extra_cutoffs.size(), 2u);
  EXPECT_EQ(c.extra_cutoffs[1][0], 4);
  EXPECT_EQ(c.total_cutoff, 5);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.out_dir, "results/a");

  std::istringstream back("delta = tied\ntotal_cutoff = none\n");
  const RunConfig d = parse_config(back, c);
  EXPECT_FALSE(d.delta.has_value());
  EXPECT_FALSE(d.total_cutoff.has_value());
}

TEST(Config, Rejections) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
  };
  EXPECT_EQ(code_of([&] { parse("unknown_key = 1"); }), ErrorCode::Config);
  EXPECT_EQ(code_of([&] { parse("drive 1.1"); }), ErrorCode::Config);
  EXPECT_EQ(code_of([&] { parse("drive = abc"); }), ErrorCode::Config);
  EXPECT_EQ(code_of([&] { parse("drive = 1.1x"); }), ErrorCode::Config);
  EXPECT_EQ(code_of([&] { parse("drive = -1"); }), ErrorCode::Config);
  EXPECT_EQ(code_of([&] { parse("delta = 2"); }), ErrorCode::Config);
  EXPECT_EQ(code_of([&] { parse("observable = Z"); }), ErrorCode::Config);
  EXPECT_EQ(code_of([&] { parse("index = 7"); }), ErrorCode::Config);
  EXPECT_EQ(code_of([&] { parse("cutoffs = 1,1,1"); }), ErrorCode::Config);
  EXPECT_EQ(code_of([&] { parse("drive_low = 2\ndrive_high = 1"); }), ErrorCode::Config);
  EXPECT_EQ(code_of([&] { parse("step = 0.5"); }), ErrorCode::Config);
  EXPECT_EQ(code_of([&] { parse("freq_knee = 1000"); }), ErrorCode::Config);
  EXPECT_EQ(code_of([&] { load_config("/nonexistent/hexkerr.cfg"); }), ErrorCode::Io);
}

TEST(Angles, Tokens) {
  EXPECT_EQ(resolve_angle("opt", 0.3, 1.2), 1.2);
  EXPECT_EQ(resolve_angle("phi", 0.3, 1.2), 0.3);
  EXPECT_DOUBLE_EQ(resolve_angle("phi+0.05", 0.3, 1.2), 0.35);
  EXPECT_DOUBLE_EQ(resolve_angle("phi-0.05", 0.3, 1.2), 0.25);
  EXPECT_EQ(resolve_angle("0.7", 0.3, 1.2), 0.7);
  EXPECT_THROW(resolve_angle("phix", 0.3, 1.2), Error);
  EXPECT_THROW(resolve_angle("half", 0.3, 1.2), Error);
  EXPECT_EQ(split_angles(" phi , opt,"), (std::vector<std::string>{"phi", "opt"}));
  EXPECT_THROW(split_angles(" , "), Error);
}

TEST(Csv, SchemaLineAndHeader) {
  const fs::path dir = scratch("csv");
  {
    CsvWriter w(dir / "sub" / "t.csv", {{"omega", "gamma"}, {"s", "shot_noise"}});
    w.row(std::vector<double>{0.5, 1.0 / 3.0});
    EXPECT_THROW(w.row(std::vector<double>{1.0}), Error);
  }
  const auto l = lines_of(dir / "sub" / "t.csv");
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[0], "# schema: omega[gamma] s[shot_noise]");
  EXPECT_EQ(l[1], "omega,s");
  EXPECT_EQ(l[2], "0.5,0.333333333333");
}

TEST(Parallel, WorkerCountAndErrors) {
  setenv("HEXKERR_THREADS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  std::vector<int> hit(50, 0);
  parallel_for(hit.size(), [&](std::size_t k) { hit[k] = static_cast<int>(k); });
  for (std::size_t k = 0; k < hit.size(); ++k) EXPECT_EQ(hit[k], static_cast<int>(k));
  try {
    parallel_for(10, [](std::size_t k) {
      if (k == 4 || k == 7) throw Error(ErrorCode::InvalidArgument, std::to_string(k));
    });
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "4");
  }
  setenv("HEXKERR_THREADS", "zero", 1);
  EXPECT_GE(worker_count(), 1u);
  unsetenv("HEXKERR_THREADS");
}

TEST(Commands, SpectrumIsDeterministic) {
  RunConfig cfg;
  cfg.observable = Observable::X;
  cfg.angles = "phi,phi+0.05,opt";
  const fs::path a = scratch("spec_a"), b = scratch("spec_b");
  cfg.out_dir = a.string();
  const auto rep = cmd_spectrum(cfg);
  cfg.out_dir = b.string();
  setenv("HEXKERR_THREADS", "1", 1);
  cmd_spectrum(cfg);
  unsetenv("HEXKERR_THREADS");
  for (const std::string f : {"spectrum_X1.csv", "spectrum_X1_angles.csv"}) {
    const std::string x = slurp(a / f);
    EXPECT_FALSE(x.empty()) << f;
    EXPECT_EQ(x, slurp(b / f)) << f;
  }
  const auto l = lines_of(a / "spectrum_X1.csv");
  ASSERT_EQ(l.size(), 2u + rep.omegas.size());
  EXPECT_EQ(l[1], "omega_over_gamma,s_phi,s_phi+0.05,s_opt");
  EXPECT_EQ(rep.angles[0], rep.solution.hex.phi);
  ASSERT_TRUE(rep.solution.integration.has_value());
  EXPECT_TRUE(rep.solution.integration->converged);
}

TEST(Commands, SteadyWritesOneRow) {
  RunConfig cfg;
  cfg.out_dir = scratch("steady").string();
  const auto rep = cmd_steady(cfg);
  EXPECT_NEAR(rep.solution.hex.beta_mag, 0.12764, 1e-5);
  EXPECT_LE(rep.growth_rate, 1e-9);
  const auto l = lines_of(fs::path(cfg.out_dir) / "steady.csv");
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[0].rfind("# schema: drive[1] delta[gamma]", 0), 0u);
}

TEST(Commands, BestSqueezeBelowFoldIsEmpty) {
  RunConfig cfg;
  cfg.drive_low = 0.8;
  cfg.drive_high = 0.9;
  cfg.out_dir = scratch("below").string();
  const auto rows = cmd_best_squeeze(cfg, {Observable::W});
  EXPECT_TRUE(rows.empty());
  EXPECT_EQ(lines_of(fs::path(cfg.out_dir) / "best_squeeze.csv").size(), 2u);
  EXPECT_EQ(lines_of(fs::path(cfg.out_dir) / "branch.csv").size(), 2u);
}

TEST(Commands, BestSqueezeAlongBranch) {
  RunConfig cfg;
  cfg.drive_low = 0.95;
  cfg.drive_high = 1.05;
  cfg.drive_step = 0.02;
  cfg.out_dir = scratch("branch").string();
  const auto rows = cmd_best_squeeze(cfg, {Observable::W, Observable::Q, Observable::X});
  // 1.05 down to 0.97; 0.95 lies past the fold.
  ASSERT_EQ(rows.size(), 3u * 5u);
  EXPECT_NEAR(rows.front().drive, 0.97, 1e-12);
  for (const auto& r : rows) {
    if (r.observable == Observable::X) {
      EXPECT_LT(r.s_min, 1e-8);
    } else {
      EXPECT_LT(r.s_min, 1.0);
    }
  }
  EXPECT_EQ(lines_of(fs::path(cfg.out_dir) / "best_squeeze.csv").size(), 2u + rows.size());
}

TEST(Commands, OraclePassesAndValidatesPumpCutoff) {
  RunConfig cfg;
  cfg.out_dir = scratch("oracle").string();
  const auto rep = cmd_oracle(cfg);
  EXPECT_TRUE(rep.all_pass());
  // two bases, three draws, 6 * 7 vanishing checks and 2 nonvanishing each
  EXPECT_EQ(rep.checks.size(), 2u * 3u * (6u * 7u + 2u));
  EXPECT_EQ(lines_of(fs::path(cfg.out_dir) / "oracle.csv").size(), 2u + rep.checks.size());

  cfg.cutoffs = Cutoffs{1, 1, 1, 1, 1, 1, 1};
  EXPECT_EQ(code_of([&] { cmd_oracle(cfg); }), ErrorCode::InvalidArgument);
  cfg.cutoffs = Cutoffs{2, 1, 1, 1, 1, 1, 1};
  cfg.basis_cap = 10;
  EXPECT_EQ(code_of([&] { cmd_oracle(cfg); }), ErrorCode::BasisTooLarge);
}
