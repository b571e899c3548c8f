#include "gimspg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "gimspg/error.hpp"
#include "gimspg/io.hpp"
#include "gimspg/metrics.hpp"
#include "gimspg/random.hpp"

namespace gimspg {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  fail(ErrorCode::kConfig, "invalid value '" + value + "' for key '" + key + "'");
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  return parts;
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) bad_value(key, value);
  return out;
}

long parse_long(const std::string& key, const std::string& value) {
  long out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value);
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  bad_value(key, value);
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split(value, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) bad_value(key, value);
  return out;
}

// Items are integers or inclusive ranges lo:hi:step.
std::vector<long> parse_long_list(const std::string& key, const std::string& value) {
  std::vector<long> out;
  for (const auto& item : split(value, ',')) {
    const auto range = split(item, ':');
    if (range.size() == 1) {
      out.push_back(parse_long(key, item));
    } else if (range.size() == 3) {
      const long lo = parse_long(key, range[0]);
      const long hi = parse_long(key, range[1]);
      const long step = parse_long(key, range[2]);
      if (step <= 0 || hi < lo) bad_value(key, value);
      for (long x = lo; x <= hi; x += step) out.push_back(x);
    } else {
      bad_value(key, value);
    }
  }
  if (out.empty()) bad_value(key, value);
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"mode",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "synth") {
           c.mode = ExperimentMode::kSynth;
         } else if (v == "image") {
           c.mode = ExperimentMode::kImage;
         } else {
           bad_value(k, v);
         }
       }},
      {"m_list", [](auto& c, auto& k, auto& v) { c.m_list = parse_long_list(k, v); }},
      {"n", [](auto& c, auto& k, auto& v) { c.n = parse_long(k, v); }},
      {"r", [](auto& c, auto& k, auto& v) { c.r = parse_long(k, v); }},
      {"sr_list", [](auto& c, auto& k, auto& v) { c.sr_list = parse_double_list(k, v); }},
      {"beta_list", [](auto& c, auto& k, auto& v) { c.beta_list = parse_double_list(k, v); }},
      {"repetitions", [](auto& c, auto& k, auto& v) { c.repetitions = parse_long(k, v); }},
      {"include_mspg", [](auto& c, auto& k, auto& v) { c.include_mspg = parse_bool(k, v); }},
      {"lambda", [](auto& c, auto& k, auto& v) { c.lambda = parse_double(k, v); }},
      {"v", [](auto& c, auto& k, auto& v) { c.v = parse_double(k, v); }},
      {"sigma_exp", [](auto& c, auto& k, auto& v) { c.solver.sigma_exp = parse_double(k, v); }},
      {"mu0", [](auto& c, auto& k, auto& v) { c.solver.mu0 = parse_double(k, v); }},
      {"a", [](auto& c, auto& k, auto& v) { c.solver.descent_threshold = parse_double(k, v); }},
      {"epsilon", [](auto& c, auto& k, auto& v) { c.solver.epsilon = parse_double(k, v); }},
      {"tol", [](auto& c, auto& k, auto& v) { c.solver.tol = parse_double(k, v); }},
      {"max_iters",
       [](auto& c, auto& k, auto& v) {
         const long n = parse_long(k, v);
         if (n <= 0) bad_value(k, v);
         c.solver.max_iters = static_cast<std::size_t>(n);
       }},
      {"kernel_modulus",
       [](auto& c, auto& k, auto& v) { c.solver.kernel_modulus = parse_double(k, v); }},
      {"enforce_v_bound",
       [](auto& c, auto& k, auto& v) { c.solver.enforce_v_bound = parse_bool(k, v); }},
      {"noise", [](auto& c, auto& k, auto& v) { c.noise = parse_bool(k, v); }},
      {"var_a", [](auto& c, auto& k, auto& v) { c.gmm.var_a = parse_double(k, v); }},
      {"var_b", [](auto& c, auto& k, auto& v) { c.gmm.var_b = parse_double(k, v); }},
      {"c", [](auto& c, auto& k, auto& v) { c.gmm.c = parse_double(k, v); }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = parse_u64(k, v); }},
      {"input", [](auto& c, auto&, auto& v) { c.input = v; }},
      {"out_dir", [](auto& c, auto&, auto& v) { c.out_dir = v; }},
      {"serial", [](auto& c, auto& k, auto& v) { c.serial = parse_bool(k, v); }},
      {"threads", [](auto& c, auto& k, auto& v) { c.threads = parse_long(k, v); }},
      {"save_traces", [](auto& c, auto& k, auto& v) { c.save_traces = parse_bool(k, v); }},
  };
  return table;
}

std::string fmt_num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + '"';
}

// One problem instance and the solves run on it.
struct Cell {
  long m = 0;
  long n = 0;
  double sr = 0.0;
  long rep = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> algorithms;  // name, beta
};

std::vector<std::pair<std::string, double>> algorithm_list(const ExperimentConfig& config) {
  std::vector<std::pair<std::string, double>> out;
  for (double beta : config.beta_list) out.emplace_back("GIMSPG", beta);
  if (config.include_mspg) out.emplace_back("MSPG", 0.0);
  return out;
}

std::string format_tag(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

CsvRow base_row(const ExperimentConfig& config, const Cell& cell, const std::string& algorithm,
                double beta) {
  CsvRow row;
  row.m = cell.m;
  row.n = cell.n;
  row.r = config.mode == ExperimentMode::kSynth ? config.r : 0;
  row.sr = cell.sr;
  row.seed = std::to_string(cell.seed);
  row.algorithm = algorithm;
  row.beta = beta;
  row.lambda = config.lambda;
  row.sigma_exp = config.solver.sigma_exp;
  row.mu0 = config.solver.mu0;
  row.v = config.v;
  row.rmse = row.psnr = row.final_mu = row.final_objective = std::nan("");
  row.final_rank = row.stationarity_residual = row.iters = row.time_s = std::nan("");
  return row;
}

void fill_from_report(CsvRow& row, const SolveReport& report, const CompletionProblem& problem,
                      const Matrix& estimate, const Matrix& truth) {
  row.v = problem.penalty.v;
  row.iters = static_cast<double>(report.iters);
  row.time_s = report.wall_time_s;
  row.rmse = rmse(estimate, truth);
  row.psnr = psnr(estimate, truth);
  row.final_mu = report.final_mu;
  row.final_objective = report.final_objective;
  row.final_rank = static_cast<double>(report.final_rank);
  row.stationarity_residual = report.stationarity_residual;
  if (report.truncated) row.error = "truncated";
}

void save_artifacts(const ExperimentConfig& config, const SolveReport& report,
                    const std::string& stem) {
  if (!config.save_traces) return;
  const fs::path dir = fs::path(config.out_dir) / "traces";
  fs::create_directories(dir);
  export_trace(report, (dir / (stem + ".tsv")).string());
  save_report(report, (dir / (stem + ".json")).string());
}

using CellRunner = std::function<std::vector<CsvRow>(const Cell&)>;

std::vector<std::vector<CsvRow>> run_cells(const ExperimentConfig& config,
                                           const std::vector<Cell>& cells,
                                           const CellRunner& runner) {
  std::vector<std::vector<CsvRow>> results(cells.size());
  long workers = config.serial ? 1 : config.threads;
  if (workers <= 0) workers = static_cast<long>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min<long>(workers, static_cast<long>(cells.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) results[i] = runner(cells[i]);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (long w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) results[i] = runner(cells[i]);
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

std::vector<CsvRow> aggregate(const std::vector<CsvRow>& rows) {
  struct Acc {
    CsvRow proto;
    std::vector<const CsvRow*> members;
  };
  std::vector<Acc> groups;
  for (const auto& row : rows) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Acc& g) {
      return g.proto.m == row.m && g.proto.n == row.n && g.proto.sr == row.sr &&
             g.proto.algorithm == row.algorithm && g.proto.beta == row.beta;
    });
    if (it == groups.end()) {
      groups.push_back({row, {}});
      it = std::prev(groups.end());
    }
    it->members.push_back(&row);
  }

  std::vector<CsvRow> out;
  for (const auto& g : groups) {
    CsvRow mean = g.proto;
    mean.seed = "mean";
    mean.error.clear();
    double fields[9] = {};
    std::size_t ok = 0;
    std::size_t failed = 0;
    for (const CsvRow* r : g.members) {
      if (std::isnan(r->rmse)) {
        ++failed;
        continue;
      }
      ++ok;
      const double values[9] = {r->v,       r->iters,         r->time_s,
                                r->rmse,    std::min(r->psnr, kPsnrCap),
                                r->final_mu, r->final_objective, r->final_rank,
                                r->stationarity_residual};
      for (int i = 0; i < 9; ++i) fields[i] += values[i];
    }
    const double denom = ok > 0 ? static_cast<double>(ok) : std::nan("");
    mean.v = fields[0] / denom;
    mean.iters = fields[1] / denom;
    mean.time_s = fields[2] / denom;
    mean.rmse = fields[3] / denom;
    mean.psnr = fields[4] / denom;
    mean.final_mu = fields[5] / denom;
    mean.final_objective = fields[6] / denom;
    mean.final_rank = fields[7] / denom;
    mean.stationarity_residual = fields[8] / denom;
    if (failed > 0) mean.error = "failed=" + std::to_string(failed);
    out.push_back(mean);
  }
  return out;
}

void write_csv(const std::vector<CsvRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path + " for writing");
  out << format_csv(rows);
  if (!out) fail(ErrorCode::kIo, "failed writing " + path);
}

std::optional<GmmNoiseParams> noise_of(const ExperimentConfig& config) {
  if (!config.noise) return std::nullopt;
  return config.gmm;
}

std::optional<double> v_of(const ExperimentConfig& config) {
  if (config.v > 0.0) return config.v;
  return std::nullopt;
}

SolverConfig solver_for(const ExperimentConfig& config, double beta, std::uint64_t seed) {
  SolverConfig solver = config.solver;
  solver.beta = beta;
  solver.seed = seed;
  return solver;
}

ExperimentResult finish(std::vector<std::vector<CsvRow>> per_cell, const std::string& path,
                        bool with_means) {
  ExperimentResult result;
  for (auto& rows : per_cell) {
    for (auto& row : rows) {
      if (!row.error.empty() && row.error != "truncated") ++result.failed_cells;
      result.rows.push_back(std::move(row));
    }
  }
  if (with_means) {
    auto means = aggregate(result.rows);
    result.rows.insert(result.rows.end(), means.begin(), means.end());
  }
  write_csv(result.rows, path);
  result.csv_path = path;
  return result;
}

}  // namespace

const char* const kCsvHeader =
    "m,n,r,sr,seed,algorithm,beta,lambda,sigma_exp,mu0,v,iters,time_s,rmse,psnr,final_mu,"
    "final_objective,final_rank,stationarity_residual,error";

ExperimentConfig::ExperimentConfig() {
  for (long m = 100; m <= 200; m += 10) m_list.push_back(m);
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(trim(key));
  if (it == table.end()) fail(ErrorCode::kConfig, "unknown configuration key '" + key + "'");
  it->second(*this, it->first, trim(value));
}

void ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfig, "cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::kConfig, path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    set(line.substr(0, eq), line.substr(eq + 1));
  }
}

void ExperimentConfig::validate() const {
  auto reject = [](const std::string& what) { fail(ErrorCode::kConfig, what); };
  if (sr_list.empty() || beta_list.empty()) reject("sweep lists must be nonempty");
  if (repetitions < 1) reject("repetitions must be >= 1");
  if (!(lambda > 0.0)) reject("lambda must be positive");
  for (double sr : sr_list)
    if (!(sr > 0.0 && sr <= 1.0)) reject("sample ratios must lie in (0, 1]");
  for (double beta : beta_list)
    if (!(beta >= 0.0 && beta <= 1.0)) reject("beta values must lie in [0, 1]");
  if (mode == ExperimentMode::kSynth) {
    if (m_list.empty()) reject("m_list must be nonempty");
    for (long m : m_list) {
      const long cols = n > 0 ? n : m;
      if (m < 1 || cols > m) reject("each m must satisfy n <= m");
      if (r < 1 || r > cols) reject("rank r must satisfy 1 <= r <= n");
    }
  } else if (input.empty()) {
    reject("image mode requires an input image");
  }
  if (noise) {
    try {
      gmm.validate();
    } catch (const Error& e) {
      reject(e.what());
    }
  }
  solver.validate();
  for (double beta : beta_list) {
    schedule_params(beta, solver.sigma_exp, 1.0, solver.kernel_modulus, solver.epsilon);
  }
}

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
  }();
  return names;
}

std::string format_csv(const std::vector<CsvRow>& rows) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.m << ',' << r.n << ',' << r.r << ',' << fmt_num(r.sr) << ',' << csv_field(r.seed)
        << ',' << csv_field(r.algorithm) << ',' << fmt_num(r.beta) << ',' << fmt_num(r.lambda)
        << ',' << fmt_num(r.sigma_exp) << ',' << fmt_num(r.mu0) << ',' << fmt_num(r.v) << ','
        << fmt_num(r.iters) << ',' << fmt_num(r.time_s) << ',' << fmt_num(r.rmse) << ','
        << fmt_num(r.psnr) << ',' << fmt_num(r.final_mu) << ',' << fmt_num(r.final_objective)
        << ',' << fmt_num(r.final_rank) << ',' << fmt_num(r.stationarity_residual) << ','
        << csv_field(r.error) << '\n';
  }
  return out.str();
}

ExperimentResult run_synth_sweep(const ExperimentConfig& config) {
  config.validate();
  fs::create_directories(config.out_dir);

  std::vector<Cell> cells;
  const auto algorithms = algorithm_list(config);
  for (long m : config.m_list) {
    for (std::size_t s = 0; s < config.sr_list.size(); ++s) {
      for (long rep = 0; rep < config.repetitions; ++rep) {
        Cell cell;
        cell.m = m;
        cell.n = config.n > 0 ? config.n : m;
        cell.sr = config.sr_list[s];
        cell.rep = rep;
        cell.seed = mix_seed(mix_seed(config.seed, static_cast<std::uint64_t>(m)),
                             static_cast<std::uint64_t>(rep) * 1024 + s);
        cell.algorithms = algorithms;
        cells.push_back(cell);
      }
    }
  }

  auto runner = [&config](const Cell& cell) {
    std::vector<CsvRow> rows;
    std::optional<CompletionProblem> problem;
    std::string build_error;
    try {
      problem = make_synthetic(cell.m, cell.n, config.r, cell.sr, noise_of(config), config.lambda,
                               cell.seed, v_of(config));
    } catch (const std::exception& e) {
      build_error = e.what();
    }
    for (const auto& [name, beta] : cell.algorithms) {
      CsvRow row = base_row(config, cell, name, beta);
      if (!problem) {
        row.error = build_error;
        rows.push_back(row);
        continue;
      }
      try {
        const SolveReport report = solve(*problem, solver_for(config, beta, cell.seed));
        fill_from_report(row, report, *problem, report.x_final, *problem->ground_truth);
        save_artifacts(config, report,
                       "m" + std::to_string(cell.m) + "_sr" + format_tag(cell.sr) + "_rep" +
                           std::to_string(cell.rep) + "_" + name + "_beta" + format_tag(beta));
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      rows.push_back(row);
    }
    return rows;
  };

  return finish(run_cells(config, cells, runner),
                (fs::path(config.out_dir) / "synth.csv").string(), true);
}

ExperimentResult run_image(const ExperimentConfig& config) {
  config.validate();
  const Matrix image = read_pgm(config.input);
  fs::create_directories(config.out_dir);

  std::vector<Cell> cells;
  for (std::size_t s = 0; s < config.sr_list.size(); ++s) {
    Cell cell;
    cell.m = image.rows();
    cell.n = image.cols();
    cell.sr = config.sr_list[s];
    cell.seed = mix_seed(config.seed, s);
    cell.algorithms = algorithm_list(config);
    cells.push_back(cell);
  }

  auto runner = [&config, &image](const Cell& cell) {
    std::vector<CsvRow> rows;
    for (const auto& [name, beta] : cell.algorithms) {
      CsvRow row = base_row(config, cell, name, beta);
      try {
        const CompletionProblem problem = make_inpainting(image, cell.sr, noise_of(config),
                                                          config.lambda, cell.seed, v_of(config));
        const SolveReport report = solve(problem, solver_for(config, beta, cell.seed));
        const Matrix recovered =
            problem.to_source_orientation(report.x_final).cwiseMax(0.0).cwiseMin(1.0);
        fill_from_report(row, report, problem, recovered, image);
        const std::string stem = "recovered_sr" + format_tag(cell.sr) + "_" + name + "_beta" +
                                 format_tag(beta);
        write_pgm((fs::path(config.out_dir) / (stem + ".pgm")).string(), recovered);
        save_artifacts(config, report, stem);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      rows.push_back(row);
    }
    return rows;
  };

  return finish(run_cells(config, cells, runner),
                (fs::path(config.out_dir) / "image.csv").string(), false);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  return config.mode == ExperimentMode::kSynth ? run_synth_sweep(config) : run_image(config);
}

}  // namespace gimspg
