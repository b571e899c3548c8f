#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gimspg/error.hpp"
#include "gimspg/experiment.hpp"
#include "gimspg/io.hpp"
#include "oracles.hpp"

using namespace gimspg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gimspg_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

ExperimentConfig tiny(const fs::path& out) {
  ExperimentConfig c;
  c.set("m_list", "30");
  c.set("n", "20");
  c.set("r", "3");
  c.set("sr_list", "0.6");
  c.set("repetitions", "1");
  c.set("out_dir", out.string());
  c.set("seed", "5");
  return c;
}

}  // namespace

TEST_CASE("config defaults and parsing") {
  ExperimentConfig c;
  CHECK(c.m_list.size() == 11);
  CHECK(c.m_list.front() == 100);
  CHECK(c.m_list.back() == 200);
  CHECK(c.lambda == 20.0);
  CHECK(c.repetitions == 20);
  CHECK(c.solver.beta == 0.4);
  c.set("m_list", "10:30:10");
  CHECK(c.m_list == std::vector<long>{10, 20, 30});
  c.set("beta_list", "0.4, 0.3");
  CHECK(c.beta_list.size() == 2);
  c.set("mode", "image");
  CHECK(c.mode == ExperimentMode::kImage);
  CHECK_THROWS_AS(c.set("bogus", "1"), Error);
  CHECK_THROWS_AS(c.set("lambda", "abc"), Error);
  c.set("repetitions", "0");
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("config file with comments") {
  const auto dir = scratch("cfg");
  {
    std::ofstream f(dir / "a.cfg");
    f << "# comment\nlambda = 30  # trailing\n\nsr_list = 0.2,0.8\n";
  }
  ExperimentConfig c;
  c.load_file((dir / "a.cfg").string());
  CHECK(c.lambda == 30.0);
  CHECK(c.sr_list == std::vector<double>{0.2, 0.8});
  {
    std::ofstream f(dir / "b.cfg");
    f << "no equals sign\n";
  }
  CHECK_THROWS_AS(c.load_file((dir / "b.cfg").string()), Error);
  CHECK_THROWS_AS(c.load_file((dir / "missing.cfg").string()), Error);
}

TEST_CASE("sweep cardinality: one (m, sr), one repetition") {
  const auto dir = scratch("card");
  const auto result = run_synth_sweep(tiny(dir));
  const auto rows = read_csv(dir / "synth.csv");
  REQUIRE(rows.size() == 1 + 4);
  CHECK(rows[0].size() == 20);
  std::string header = kCsvHeader;
  CHECK(slurp(dir / "synth.csv").rfind(header + "\n", 0) == 0);
  CHECK(rows[1][5] == "GIMSPG");
  CHECK(rows[2][5] == "MSPG");
  CHECK(rows[3][4] == "mean");
  CHECK(rows[4][4] == "mean");
  CHECK(result.failed_cells == 0);
}

TEST_CASE("sweep is deterministic apart from timing") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  auto ca = tiny(a);
  ca.set("repetitions", "2");
  ca.set("sr_list", "0.4,0.8");
  auto cb = ca;
  cb.out_dir = b.string();
  cb.serial = true;
  run_synth_sweep(ca);
  run_synth_sweep(cb);
  auto ra = read_csv(a / "synth.csv");
  auto rb = read_csv(b / "synth.csv");
  REQUIRE(ra.size() == rb.size());
  const std::size_t time_col = 12;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    REQUIRE(ra[i].size() == rb[i].size());
    for (std::size_t j = 0; j < ra[i].size(); ++j) {
      if (i > 0 && j == time_col) continue;
      CHECK(ra[i][j] == rb[i][j]);
    }
  }
}

TEST_CASE("failed cells are recorded and the sweep continues") {
  const auto dir = scratch("fail");
  auto c = tiny(dir);
  c.set("v", "1e6");  // violates the v bound in every cell
  const auto result = run_synth_sweep(c);
  CHECK(result.failed_cells == 2);
  const auto rows = read_csv(dir / "synth.csv");
  REQUIRE(rows.size() == 5);
  CHECK(!rows[1].back().empty());
  CHECK(rows[3].back() == "failed=1");
}

TEST_CASE("PGM round trip") {
  const auto dir = scratch("pgm");
  const Matrix img = oracle::low_rank_image(9, 13, 2, 3);
  write_pgm((dir / "a.pgm").string(), img);
  const Matrix back = read_pgm((dir / "a.pgm").string());
  CHECK(back.rows() == 9);
  CHECK(back.cols() == 13);
  CHECK((back - img).cwiseAbs().maxCoeff() <= 0.5 / 255.0 + 1e-12);
  write_pgm((dir / "b.pgm").string(), back);
  CHECK(slurp(dir / "a.pgm") == slurp(dir / "b.pgm"));

  {
    std::ofstream f(dir / "ascii.pgm");
    f << "P2\n# c\n2 1\n255\n0 255\n";
  }
  const Matrix ascii = read_pgm((dir / "ascii.pgm").string());
  CHECK(ascii(0, 0) == 0.0);
  CHECK(ascii(0, 1) == 1.0);
  CHECK_THROWS_AS(read_pgm((dir / "none.pgm").string()), Error);
  {
    std::ofstream f(dir / "trunc.pgm", std::ios::binary);
    f << "P5\n4 4\n255\n" << "abc";
  }
  CHECK_THROWS_AS(read_pgm((dir / "trunc.pgm").string()), Error);
}

TEST_CASE("trace export and report round trip") {
  const auto dir = scratch("trace");
  const auto problem = make_synthetic(60, 40, 5, 0.6, std::nullopt, 400.0, 7);
  const auto report = solve(problem, SolverConfig{});
  export_trace(report, (dir / "t.tsv").string());
  std::ifstream in(dir / "t.tsv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "k\tobjective\tH\tmu\tstep_norm\td_changes\tdescent_gap");
  std::size_t n = 0;
  double last_mu = 0.0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string k, obj, h, mu;
    std::getline(ss, k, '\t');
    std::getline(ss, obj, '\t');
    std::getline(ss, h, '\t');
    std::getline(ss, mu, '\t');
    last_mu = std::stod(mu);
    ++n;
  }
  CHECK(n == report.iters + 1);
  CHECK(last_mu == report.final_mu);

  save_report(report, (dir / "r.json").string());
  const auto loaded = load_report((dir / "r.json").string());
  CHECK(loaded.iters == report.iters);
  CHECK(loaded.final_mu == report.final_mu);
  CHECK(loaded.trace.rows.size() == report.trace.rows.size());
  export_trace(loaded, (dir / "t2.tsv").string());
  CHECK(slurp(dir / "t.tsv") == slurp(dir / "t2.tsv"));
  CHECK_THROWS_AS(export_trace(report, (dir / "no/such/dir/t.tsv").string()), Error);
}

TEST_CASE("image run writes a same-size recovered image") {
  const auto dir = scratch("image");
  const Matrix img = oracle::low_rank_image(24, 16, 2, 1);
  write_pgm((dir / "in.pgm").string(), img);
  ExperimentConfig c;
  c.set("mode", "image");
  c.set("input", (dir / "in.pgm").string());
  c.set("out_dir", (dir / "out").string());
  c.set("sr_list", "0.2,0.8");
  c.set("lambda", "100");
  c.set("noise", "false");
  c.set("include_mspg", "false");
  const auto result = run_image(c);
  CHECK(result.failed_cells == 0);
  const Matrix out = read_pgm((dir / "out" / "recovered_sr0.8_GIMSPG_beta0.4.pgm").string());
  CHECK(out.rows() == 24);
  CHECK(out.cols() == 16);
  const auto rows = read_csv(dir / "out" / "image.csv");
  CHECK(rows.size() == 3);

  c.set("input", (dir / "missing.pgm").string());
  CHECK_THROWS_AS(run_image(c), Error);
}
