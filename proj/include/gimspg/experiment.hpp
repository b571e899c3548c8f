#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gimspg/problems.hpp"
#include "gimspg/solver.hpp"

namespace gimspg {

enum class ExperimentMode { kSynth, kImage };

/// Experiment harness settings. Defaults reproduce the random-data study:
/// m = n from 100 to 200 step 10, r = 30, sr in {0.2, 0.6, 0.8},
/// beta = 0.4, 20 repetitions, lambda = 20, GMM(0.0001, 0.1, 0.1).
struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::kSynth;
  std::vector<long> m_list;
  long n = 0;  ///< 0 means square, n = m
  long r = 30;
  std::vector<double> sr_list{0.2, 0.6, 0.8};
  std::vector<double> beta_list{0.4};
  long repetitions = 20;
  bool include_mspg = true;

  double lambda = 20.0;
  double v = 0.0;  ///< <= 0 selects 0.9 lambda / L_f per problem
  SolverConfig solver;

  bool noise = true;
  GmmNoiseParams gmm;

  std::uint64_t seed = 0;
  std::string input;  ///< image mode: PGM path
  std::string out_dir = ".";
  bool serial = false;
  long threads = 0;  ///< 0 picks the hardware concurrency
  bool save_traces = false;

  ExperimentConfig();

  /// Applies one key = value setting. Throws Error(kConfig) on an unknown
  /// key or an unparsable value.
  void set(const std::string& key, const std::string& value);
  /// Reads a flat key = value file; '#' starts a comment.
  void load_file(const std::string& path);
  void validate() const;

  static const std::vector<std::string>& keys();
};

/// One CSV row. Aggregate rows carry seed "mean".
struct CsvRow {
  long m = 0;
  long n = 0;
  long r = 0;
  double sr = 0.0;
  std::string seed;
  std::string algorithm;
  double beta = 0.0;
  double lambda = 0.0;
  double sigma_exp = 0.0;
  double mu0 = 0.0;
  double v = 0.0;
  double iters = 0.0;
  double time_s = 0.0;
  double rmse = 0.0;
  double psnr = 0.0;
  double final_mu = 0.0;
  double final_objective = 0.0;
  double final_rank = 0.0;
  double stationarity_residual = 0.0;
  std::string error;
};

extern const char* const kCsvHeader;

std::string format_csv(const std::vector<CsvRow>& rows);

struct ExperimentResult {
  std::vector<CsvRow> rows;
  std::size_t failed_cells = 0;
  std::string csv_path;
};

/// For each (m, sr, repetition) builds one problem and solves it with
/// GIMSPG for every beta in the sweep and with MSPG (beta = 0). Mean rows
/// per (m, sr, algorithm, beta) follow the data rows. Writes synth.csv to
/// out_dir.
ExperimentResult run_synth_sweep(const ExperimentConfig& config);

/// For each sr builds an inpainting problem from the input image, solves
/// it, writes the recovered image as PGM and one CSV row to image.csv.
ExperimentResult run_image(const ExperimentConfig& config);

ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace gimspg
