#pragma once

#include <string>

#include "gimspg/solver.hpp"

namespace gimspg {

/// Reads an 8-bit grayscale PGM (binary P5 or ASCII P2). Pixel p maps to
/// p / maxval, so the result lies in [0, 1].
Matrix read_pgm(const std::string& path);

/// Writes a binary P5 PGM with maxval 255. Values are clamped to [0, 1]
/// and rounded to the nearest level.
void write_pgm(const std::string& path, const Matrix& image);

/// Tab-separated per-iteration trace with a one-line header:
/// k, objective, H, mu, step_norm, d_changes, descent_gap.
void export_trace(const SolveReport& report, const std::string& path);

/// Saves the scalar results and the trace of a report as JSON. The final
/// iterate is not stored.
void save_report(const SolveReport& report, const std::string& path);
SolveReport load_report(const std::string& path);

}  // namespace gimspg
