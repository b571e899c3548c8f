// gimspg: experiment harness front end over the C API.
//
//   gimspg synth [--config FILE] [--KEY VALUE ...] [--set KEY=VALUE ...]
//   gimspg image --input img.pgm [...]
//   gimspg trace --report report.json --out trace.tsv
//
// Settings apply in order: config file, flags, --set overrides.
// Exit codes: 0 success, 1 a cell failed or the run aborted, 2 bad configuration.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gimspg/gimspg.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;

struct RunOptions {
  std::string config_file;
  std::map<std::string, std::string> flags;
  std::vector<std::string> overrides;
  bool serial = false;
};

bool is_config_status(gimspg_status s) {
  return s == GIMSPG_ERR_CONFIG || s == GIMSPG_ERR_INVALID_ARGUMENT;
}

void report_error(const char* what) {
  std::fprintf(stderr, "gimspg: %s: %s\n", what, gimspg_last_error());
}

// One option per experiment key; --m_list and --m-list both work.
void add_experiment_flags(CLI::App* cmd, RunOptions& opts) {
  cmd->add_option("--config", opts.config_file, "key = value settings file");
  cmd->add_option("--set", opts.overrides, "KEY=VALUE override, repeatable");
  cmd->add_flag("--serial", opts.serial, "run cells one at a time (faithful timing)");
  for (size_t i = 0; i < gimspg_experiment_key_count(); ++i) {
    const std::string key = gimspg_experiment_key(i);
    if (key == "serial" || key == "mode") continue;
    std::string names = "--" + key;
    std::string dashed = key;
    for (char& c : dashed) c = c == '_' ? '-' : c;
    if (dashed != key) names += ",--" + dashed;
    cmd->add_option_function<std::string>(
        names, [&opts, key](const std::string& v) { opts.flags[key] = v; }, "");
  }
}

int run(const char* mode, const RunOptions& opts) {
  gimspg_experiment* exp = nullptr;
  if (gimspg_experiment_create(&exp) != GIMSPG_OK) {
    report_error("init");
    return kExitFailed;
  }
  auto apply = [&]() -> gimspg_status {
    gimspg_status s = gimspg_experiment_set(exp, "mode", mode);
    if (s != GIMSPG_OK) return s;
    if (!opts.config_file.empty()) {
      s = gimspg_experiment_load_file(exp, opts.config_file.c_str());
      if (s != GIMSPG_OK) return s;
    }
    for (const auto& [k, v] : opts.flags) {
      s = gimspg_experiment_set(exp, k.c_str(), v.c_str());
      if (s != GIMSPG_OK) return s;
    }
    for (const auto& kv : opts.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "gimspg: --set expects KEY=VALUE, got '%s'\n", kv.c_str());
        return GIMSPG_ERR_CONFIG;
      }
      s = gimspg_experiment_set(exp, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
      if (s != GIMSPG_OK) return s;
    }
    if (opts.serial) s = gimspg_experiment_set(exp, "serial", "true");
    return s;
  };

  const gimspg_status configured = apply();
  if (configured != GIMSPG_OK) {
    report_error("configuration");
    gimspg_experiment_destroy(exp);
    return kExitConfig;
  }

  size_t failed = 0;
  char csv[4096] = {0};
  const gimspg_status ran = gimspg_experiment_run(exp, &failed, csv, sizeof csv);
  gimspg_experiment_destroy(exp);
  if (ran != GIMSPG_OK) {
    report_error(mode);
    return ran == GIMSPG_ERR_CONFIG ? kExitConfig : kExitFailed;
  }
  std::printf("wrote %s\n", csv);
  if (failed > 0) {
    std::fprintf(stderr, "gimspg: %zu cell(s) failed; see the error column\n", failed);
    return kExitFailed;
  }
  return kExitOk;
}

int retrace(const std::string& report_path, const std::string& out_path) {
  gimspg_report* report = nullptr;
  if (gimspg_report_load(report_path.c_str(), &report) != GIMSPG_OK) {
    report_error("trace");
    return kExitFailed;
  }
  const gimspg_status s = gimspg_report_export_trace(report, out_path.c_str());
  gimspg_report_destroy(report);
  if (s != GIMSPG_OK) {
    report_error("trace");
    return kExitFailed;
  }
  std::printf("wrote %s\n", out_path.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GIMSPG capped-l1 matrix completion experiments"};
  app.set_version_flag("--version", std::string(gimspg_version()));
  app.require_subcommand(1);

  RunOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "random low-rank completion sweep");
  add_experiment_flags(synth, synth_opts);

  RunOptions image_opts;
  auto* image = app.add_subcommand("image", "inpainting of a PGM image");
  add_experiment_flags(image, image_opts);

  std::string report_path, trace_out;
  auto* trace = app.add_subcommand("trace", "re-export the iteration trace of a saved report");
  trace->add_option("--report", report_path, "report JSON")->required();
  trace->add_option("--out", trace_out, "output TSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*synth) return run("synth", synth_opts);
  if (*image) return run("image", image_opts);
  return retrace(report_path, trace_out);
}
