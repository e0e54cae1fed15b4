// Command-line runner over the C interface.
//
//   ncgl run --config manifest.json --suite bg --p 3,4 --out report.csv
//   ncgl suites
//
// Exit codes: 0 all rows pass, 1 some row fails, 2 input or io error.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ncgl/ncgl.h"

namespace {

int input_error(const std::string& what) {
  std::cerr << "error: " << what << "\n";
  return 2;
}

int status_error(ncgl_status s) {
  std::cerr << "error (" << ncgl_status_name(s) << "): " << ncgl_last_error() << "\n";
  return 2;
}

struct RunOptions {
  std::string config_path;
  std::optional<std::string> suite;
  std::vector<double> p;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::vector<std::int64_t> dims;
  std::optional<double> B;
  std::optional<double> beta;
  std::optional<int> budget;
  std::optional<int> threads;
  bool timing = false;
  std::string out;
  std::string format = "csv";
  bool quiet = false;
};

int run_command(const RunOptions& o) {
  ncgl_config* cfg = nullptr;
  ncgl_status s;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) return input_error("cannot read config file " + o.config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    s = ncgl_config_from_json(ss.str().c_str(), &cfg);
  } else {
    s = ncgl_config_create(&cfg);
  }
  if (s != NCGL_OK) return status_error(s);

  auto apply = [&]() -> ncgl_status {
    ncgl_status r = NCGL_OK;
    auto step = [&](ncgl_status x) {
      if (r == NCGL_OK) r = x;
    };
    if (o.suite) step(ncgl_config_set_suite(cfg, o.suite->c_str()));
    if (!o.p.empty()) step(ncgl_config_set_p_grid(cfg, o.p.data(), o.p.size()));
    if (o.trials) step(ncgl_config_set_trials(cfg, *o.trials));
    if (o.seed) step(ncgl_config_set_seed(cfg, *o.seed));
    if (!o.dims.empty()) step(ncgl_config_set_dims(cfg, o.dims.data(), o.dims.size()));
    if (o.B) step(ncgl_config_set_B(cfg, *o.B));
    if (o.beta) step(ncgl_config_set_beta(cfg, *o.beta));
    if (o.budget) step(ncgl_config_set_budget(cfg, *o.budget));
    if (o.threads) step(ncgl_config_set_threads(cfg, *o.threads));
    if (o.timing) step(ncgl_config_set_timing(cfg, 1));
    return r;
  };
  s = apply();
  if (s == NCGL_OK) s = ncgl_config_validate(cfg);
  if (s != NCGL_OK) {
    ncgl_config_destroy(cfg);
    return status_error(s);
  }

  ncgl_result* res = nullptr;
  s = ncgl_run(cfg, &res);
  ncgl_config_destroy(cfg);
  if (s != NCGL_OK) return status_error(s);

  if (!o.out.empty()) {
    s = ncgl_result_write(res, o.format.c_str(), o.out.c_str());
  } else {
    char* text = nullptr;
    s = ncgl_result_format(res, o.format.c_str(), &text);
    if (s == NCGL_OK) {
      std::fputs(text, stdout);
      ncgl_string_free(text);
    }
  }
  if (s != NCGL_OK) {
    ncgl_result_destroy(res);
    return status_error(s);
  }

  const int code = ncgl_result_exit_code(res);
  if (!o.quiet) {
    // With no --out the report already went to stdout, so the summary goes to stderr.
    FILE* sink = o.out.empty() ? stderr : stdout;
    std::fprintf(sink, "rows: %zu\nfailures: %zu\nmin margin: %.17g\ndefects ok: %s\n",
                 ncgl_result_row_count(res), ncgl_result_failures(res), ncgl_result_min_margin(res),
                 ncgl_result_defects_ok(res) ? "yes" : "no");
    const std::size_t nc = ncgl_result_constant_count(res);
    if (nc > 0) std::fprintf(sink, "constants:\n");
    for (std::size_t i = 0; i < nc; ++i) std::fprintf(sink, "  %s\n", ncgl_result_constant(res, i));
    std::fprintf(sink, "%s\n", code == 0 ? "all rows pass" : "some rows fail");
  }
  ncgl_result_destroy(res);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized numerical verification of noncommutative martingale inequalities"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ncgl_version()));

  RunOptions o;
  CLI::App* run = app.add_subcommand("run", "Run a verification suite");
  run->add_option("--config", o.config_path, "JSON experiment manifest")->check(CLI::ExistingFile);
  run->add_option("--suite", o.suite, "Suite name (see `suites`)");
  run->add_option("--p", o.p, "Exponent grid, comma separated")->delimiter(',');
  run->add_option("--trials", o.trials, "Trials per exponent");
  run->add_option("--seed", o.seed, "64-bit seed");
  run->add_option("--dim", o.dims, "Size parameters, comma separated")->delimiter(',');
  run->add_option("--B", o.B, "Geometric base B > 1");
  run->add_option("--beta", o.beta, "Tail parameter beta > 1");
  run->add_option("--budget", o.budget, "Optimizer iterations for norm lower bounds");
  run->add_option("--threads", o.threads, "Worker threads (0: NCGL_THREADS or hardware)");
  run->add_flag("--timing", o.timing, "Record wall time per row (ms column)");
  run->add_option("--out", o.out, "Report file (default: stdout)");
  run->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  run->add_flag("--quiet", o.quiet, "No summary");

  CLI::App* suites = app.add_subcommand("suites", "List suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (suites->parsed()) {
    for (std::size_t i = 0; i < ncgl_suite_count(); ++i) std::printf("%s\n", ncgl_suite_name(i));
    return 0;
  }
  return run_command(o);
}
