#include "gimspg/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gimspg/error.hpp"

namespace gimspg {

namespace {

using nlohmann::json;

// Skips whitespace and '#' comments between PGM header tokens.
void skip_separators(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

long read_header_int(std::istream& in, const std::string& path) {
  skip_separators(in);
  long value = -1;
  if (!(in >> value) || value < 0) fail(ErrorCode::kIo, "malformed PGM header in " + path);
  return value;
}

std::ofstream open_for_write(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path + " for writing");
  return out;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// JSON has no inf/nan; spell them as strings so they survive a round trip.
json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double num(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  fail(ErrorCode::kIo, "bad number '" + s + "'");
}

}  // namespace

Matrix read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open image " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P2") fail(ErrorCode::kIo, path + " is not a grayscale PGM");
  const long width = read_header_int(in, path);
  const long height = read_header_int(in, path);
  const long maxval = read_header_int(in, path);
  if (width == 0 || height == 0) fail(ErrorCode::kIo, "PGM has no pixels: " + path);
  if (maxval == 0 || maxval > 255) fail(ErrorCode::kIo, "only 8-bit PGM is supported: " + path);

  Matrix image(height, width);
  if (magic == "P5") {
    in.get();  // single whitespace byte after maxval
    std::vector<unsigned char> bytes(static_cast<std::size_t>(width * height));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
      fail(ErrorCode::kIo, "truncated PGM pixel data in " + path);
    }
    for (long i = 0; i < height; ++i)
      for (long j = 0; j < width; ++j)
        image(i, j) = static_cast<double>(bytes[static_cast<std::size_t>(i * width + j)]);
  } else {
    for (long i = 0; i < height; ++i) {
      for (long j = 0; j < width; ++j) {
        const long p = read_header_int(in, path);
        image(i, j) = static_cast<double>(p);
      }
    }
  }
  if (image.maxCoeff() > static_cast<double>(maxval)) {
    fail(ErrorCode::kIo, "PGM pixel exceeds maxval in " + path);
  }
  return image / static_cast<double>(maxval);
}

void write_pgm(const std::string& path, const Matrix& image) {
  if (image.size() == 0) fail(ErrorCode::kInvalidArgument, "cannot write an empty image");
  std::ofstream out = open_for_write(path, std::ios::binary);
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  std::vector<unsigned char> bytes(static_cast<std::size_t>(image.size()));
  for (Eigen::Index i = 0; i < image.rows(); ++i) {
    for (Eigen::Index j = 0; j < image.cols(); ++j) {
      const double x = std::clamp(image(i, j), 0.0, 1.0);
      bytes[static_cast<std::size_t>(i * image.cols() + j)] =
          static_cast<unsigned char>(std::lround(x * 255.0));
    }
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "failed writing " + path);
}

void export_trace(const SolveReport& report, const std::string& path) {
  std::ofstream out = open_for_write(path);
  out << "k\tobjective\tH\tmu\tstep_norm\td_changes\tdescent_gap\n";
  for (const auto& row : report.trace.rows) {
    out << row.k << '\t' << fmt(row.objective) << '\t' << fmt(row.energy) << '\t' << fmt(row.mu)
        << '\t' << fmt(row.step_norm) << '\t' << row.d_changes << '\t' << fmt(row.descent_gap)
        << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "failed writing " + path);
}

void save_report(const SolveReport& report, const std::string& path) {
  json trace = json::array();
  for (const auto& row : report.trace.rows) {
    trace.push_back({{"k", row.k},
                     {"objective", num(row.objective)},
                     {"H", num(row.energy)},
                     {"mu", num(row.mu)},
                     {"step_norm", num(row.step_norm)},
                     {"d_changes", row.d_changes},
                     {"descent_gap", num(row.descent_gap)}});
  }
  const json doc = {{"format", "gimspg-report"},
                    {"version", 1},
                    {"iters", report.iters},
                    {"wall_time_s", num(report.wall_time_s)},
                    {"final_mu", num(report.final_mu)},
                    {"final_objective", num(report.final_objective)},
                    {"final_rank", report.final_rank},
                    {"near_zero_count", report.near_zero_count},
                    {"ns_count", report.ns_count},
                    {"d_change_count", report.d_change_count},
                    {"truncated", report.truncated},
                    {"stationarity_residual", num(report.stationarity_residual)},
                    {"alpha", report.params.alpha},
                    {"h", report.params.h},
                    {"trace", trace}};
  std::ofstream out = open_for_write(path);
  out << doc.dump(1) << '\n';
  if (!out) fail(ErrorCode::kIo, "failed writing " + path);
}

SolveReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open report " + path);
  SolveReport report;
  try {
    const json doc = json::parse(in);
    if (doc.value("format", "") != "gimspg-report") {
      fail(ErrorCode::kIo, path + " is not a solve report");
    }
    report.iters = doc.at("iters").get<std::size_t>();
    report.wall_time_s = num(doc.at("wall_time_s"));
    report.final_mu = num(doc.at("final_mu"));
    report.final_objective = num(doc.at("final_objective"));
    report.final_rank = doc.at("final_rank").get<std::size_t>();
    report.near_zero_count = doc.at("near_zero_count").get<std::size_t>();
    report.ns_count = doc.at("ns_count").get<std::size_t>();
    report.d_change_count = doc.at("d_change_count").get<std::size_t>();
    report.truncated = doc.at("truncated").get<bool>();
    report.stationarity_residual = num(doc.at("stationarity_residual"));
    report.params.alpha = doc.at("alpha").get<double>();
    report.params.h = doc.at("h").get<double>();
    for (const auto& row : doc.at("trace")) {
      report.trace.rows.push_back({row.at("k").get<std::size_t>(),
                                   num(row.at("objective")), num(row.at("H")),
                                   num(row.at("mu")), num(row.at("step_norm")),
                                   row.at("d_changes").get<std::size_t>(),
                                   num(row.at("descent_gap"))});
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kIo, "malformed report " + path + ": " + e.what());
  }
  return report;
}

}  // namespace gimspg
