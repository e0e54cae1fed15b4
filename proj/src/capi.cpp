#include "ncgl/ncgl.h"

#include <cstring>
#include <new>
#include <string>

#include "applications.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "goodlambda.hpp"

struct ncgl_config {
  ncgl::ExperimentConfig cfg;
};

struct ncgl_result {
  ncgl::RunResult result;
};

namespace {

thread_local std::string last_error;

ncgl_status status_of(ncgl::ErrorCode c) {
  switch (c) {
    case ncgl::ErrorCode::Structural: return NCGL_ERR_STRUCTURAL;
    case ncgl::ErrorCode::Domain: return NCGL_ERR_DOMAIN;
    case ncgl::ErrorCode::NumericalRank: return NCGL_ERR_NUMERICAL_RANK;
    case ncgl::ErrorCode::Instability: return NCGL_ERR_INSTABILITY;
    case ncgl::ErrorCode::Config: return NCGL_ERR_CONFIG;
    case ncgl::ErrorCode::Io: return NCGL_ERR_IO;
  }
  return NCGL_ERR_INTERNAL;
}

template <class F>
ncgl_status guard(F&& f) {
  try {
    f();
    last_error.clear();
    return NCGL_OK;
  } catch (const ncgl::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return NCGL_ERR_INTERNAL;
}

ncgl_status null_arg(const char* what) {
  last_error = std::string("null argument: ") + what;
  return NCGL_ERR_NULL_ARGUMENT;
}

#define NCGL_REQUIRE(p) \
  if ((p) == nullptr) return null_arg(#p)

}  // namespace

extern "C" {

const char* ncgl_version(void) { return "0.1.0"; }

const char* ncgl_last_error(void) { return last_error.c_str(); }

const char* ncgl_status_name(ncgl_status s) {
  switch (s) {
    case NCGL_OK: return "ok";
    case NCGL_ERR_STRUCTURAL: return "structural";
    case NCGL_ERR_DOMAIN: return "domain";
    case NCGL_ERR_NUMERICAL_RANK: return "numerical-rank";
    case NCGL_ERR_INSTABILITY: return "instability";
    case NCGL_ERR_CONFIG: return "config";
    case NCGL_ERR_IO: return "io";
    case NCGL_ERR_NULL_ARGUMENT: return "null-argument";
    case NCGL_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

size_t ncgl_suite_count(void) { return ncgl::suite_names().size(); }

const char* ncgl_suite_name(size_t i) {
  const auto& n = ncgl::suite_names();
  return i < n.size() ? n[i].c_str() : nullptr;
}

ncgl_status ncgl_config_create(ncgl_config** out) {
  NCGL_REQUIRE(out);
  return guard([&] { *out = new ncgl_config{}; });
}

ncgl_status ncgl_config_from_json(const char* json, ncgl_config** out) {
  NCGL_REQUIRE(json);
  NCGL_REQUIRE(out);
  return guard([&] { *out = new ncgl_config{ncgl::config_from_json(json)}; });
}

void ncgl_config_destroy(ncgl_config* c) { delete c; }

ncgl_status ncgl_config_set_suite(ncgl_config* c, const char* suite) {
  NCGL_REQUIRE(c);
  NCGL_REQUIRE(suite);
  return guard([&] { c->cfg.suite = suite; });
}

ncgl_status ncgl_config_set_trials(ncgl_config* c, int trials) {
  NCGL_REQUIRE(c);
  return guard([&] { c->cfg.trials = trials; });
}

ncgl_status ncgl_config_set_seed(ncgl_config* c, uint64_t seed) {
  NCGL_REQUIRE(c);
  return guard([&] { c->cfg.seed = seed; });
}

ncgl_status ncgl_config_set_p_grid(ncgl_config* c, const double* p, size_t n) {
  NCGL_REQUIRE(c);
  if (n > 0) NCGL_REQUIRE(p);
  return guard([&] { c->cfg.p_grid.assign(p, p + n); });
}

ncgl_status ncgl_config_set_dims(ncgl_config* c, const int64_t* dims, size_t n) {
  NCGL_REQUIRE(c);
  if (n > 0) NCGL_REQUIRE(dims);
  return guard([&] { c->cfg.dims.assign(dims, dims + n); });
}

ncgl_status ncgl_config_set_B(ncgl_config* c, double B) {
  NCGL_REQUIRE(c);
  return guard([&] { c->cfg.B = B; });
}

ncgl_status ncgl_config_set_beta(ncgl_config* c, double beta) {
  NCGL_REQUIRE(c);
  return guard([&] { c->cfg.beta = beta; });
}

ncgl_status ncgl_config_set_budget(ncgl_config* c, int budget) {
  NCGL_REQUIRE(c);
  return guard([&] { c->cfg.budget = budget; });
}

ncgl_status ncgl_config_set_timing(ncgl_config* c, int on) {
  NCGL_REQUIRE(c);
  return guard([&] { c->cfg.timing = on != 0; });
}

ncgl_status ncgl_config_set_threads(ncgl_config* c, int threads) {
  NCGL_REQUIRE(c);
  return guard([&] { c->cfg.threads = threads; });
}

ncgl_status ncgl_config_validate(const ncgl_config* c) {
  NCGL_REQUIRE(c);
  return guard([&] { ncgl::validate(c->cfg); });
}

ncgl_status ncgl_run(const ncgl_config* c, ncgl_result** out) {
  NCGL_REQUIRE(c);
  NCGL_REQUIRE(out);
  *out = nullptr;
  return guard([&] { *out = new ncgl_result{ncgl::run(c->cfg)}; });
}

void ncgl_result_destroy(ncgl_result* r) { delete r; }

size_t ncgl_result_row_count(const ncgl_result* r) { return r ? r->result.rows.size() : 0; }

ncgl_status ncgl_result_row(const ncgl_result* r, size_t i, ncgl_row* out) {
  NCGL_REQUIRE(r);
  NCGL_REQUIRE(out);
  if (i >= r->result.rows.size()) {
    last_error = "row index out of range";
    return NCGL_ERR_STRUCTURAL;
  }
  const auto& row = r->result.rows[i];
  *out = ncgl_row{row.suite.c_str(), row.instance.c_str(), row.seed, row.lhs, row.rhs, row.constant,
                  row.margin, row.pass ? 1 : 0, row.ms, row.flag.c_str(), row.defects_ok ? 1 : 0};
  return NCGL_OK;
}

size_t ncgl_result_failures(const ncgl_result* r) { return r ? r->result.summary.failures : 0; }

double ncgl_result_min_margin(const ncgl_result* r) { return r ? r->result.summary.min_margin : 0.0; }

int ncgl_result_defects_ok(const ncgl_result* r) { return r && r->result.summary.defects_ok ? 1 : 0; }

int ncgl_result_exit_code(const ncgl_result* r) { return r ? r->result.exit_code() : 2; }

size_t ncgl_result_constant_count(const ncgl_result* r) { return r ? r->result.summary.constants.size() : 0; }

const char* ncgl_result_constant(const ncgl_result* r, size_t i) {
  if (!r || i >= r->result.summary.constants.size()) return nullptr;
  return r->result.summary.constants[i].c_str();
}

ncgl_status ncgl_result_format(const ncgl_result* r, const char* format, char** out) {
  NCGL_REQUIRE(r);
  NCGL_REQUIRE(format);
  NCGL_REQUIRE(out);
  return guard([&] {
    const std::string f = format;
    ncgl::require(f == "csv" || f == "json", ncgl::ErrorCode::Config, "format must be csv or json");
    const std::string s = f == "csv" ? ncgl::to_csv(r->result.rows) : ncgl::to_json(r->result);
    char* buf = new char[s.size() + 1];
    std::memcpy(buf, s.c_str(), s.size() + 1);
    *out = buf;
  });
}

ncgl_status ncgl_result_write(const ncgl_result* r, const char* format, const char* path) {
  NCGL_REQUIRE(r);
  NCGL_REQUIRE(format);
  NCGL_REQUIRE(path);
  return guard([&] { ncgl::emit(r->result, format, path); });
}

void ncgl_string_free(char* s) { delete[] s; }

ncgl_status ncgl_main_constant(double p, double* out) {
  NCGL_REQUIRE(out);
  return guard([&] { *out = ncgl::main_constant(p); });
}

ncgl_status ncgl_moment_constant(double p, double B, double* c_pB, double* simplified) {
  NCGL_REQUIRE(c_pB);
  NCGL_REQUIRE(simplified);
  return guard([&] {
    const ncgl::MomentConstant m = ncgl::moment_constant(p, B);
    *c_pB = m.C_pB;
    *simplified = m.simplified;
  });
}

ncgl_status ncgl_tangent_counterexample(int N, double p, double* tau_weak_y, double* tau_abs_x, double* norm_ratio) {
  NCGL_REQUIRE(tau_weak_y);
  NCGL_REQUIRE(tau_abs_x);
  NCGL_REQUIRE(norm_ratio);
  return guard([&] {
    const ncgl::CounterexampleReport r = ncgl::tangent_counterexample(N, p);
    *tau_weak_y = r.weak_lhs;
    *tau_abs_x = r.tau_abs_x;
    *norm_ratio = r.norm_ratio;
  });
}

}  // extern "C"
