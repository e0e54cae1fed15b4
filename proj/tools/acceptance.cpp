// Acceptance runner: one PASS/FAIL line per criterion, exit 0 iff all pass.
//
//   ncgl_acceptance                 all criteria
//   ncgl_acceptance 1 5 10          selected criteria

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cuculescu.hpp"
#include "experiments.hpp"
#include "filtration.hpp"
#include "applications.hpp"
#include "goodlambda.hpp"
#include "rng.hpp"
#include "schur.hpp"

using namespace ncgl;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Rows from every suite run, for the invariants criterion.
std::vector<ReportRow> g_rows;
std::vector<std::string> g_sequence_suites;

RunResult run_suite(const std::string& suite, int trials, std::vector<double> p, std::uint64_t seed,
                    std::vector<long long> dims = {}) {
  ExperimentConfig c;
  c.suite = suite;
  c.trials = trials;
  c.p_grid = std::move(p);
  c.seed = seed;
  c.dims = std::move(dims);
  RunResult r = run(c);
  g_rows.insert(g_rows.end(), r.rows.begin(), r.rows.end());
  g_sequence_suites.push_back(suite);
  return r;
}

std::string summary(const RunResult& r) {
  std::ostringstream s;
  s << r.config.suite << ": " << r.summary.rows << " rows, " << r.summary.failures << " failures, min margin "
    << r.summary.min_margin;
  return s.str();
}

Matrix random_matrix(Index n, Rng& rng) {
  Matrix a(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) a(i, j) = rng.complex_gaussian();
  return a;
}

Outcome counterexample() {
  Outcome o;
  std::ostringstream d;
  for (int N : {3, 5, 7, 9, 11, 13}) {
    const CounterexampleReport r = tangent_counterexample(N, 1.5);
    const double e1 = std::abs(r.weak_lhs - (N + 1.0));
    const double e2 = std::abs(r.tau_abs_x - 2.0 * std::sqrt(N));
    if (e1 > 1e-8 || e2 > 1e-9) o.pass = false;
    d << "N=" << N << " (" << r.weak_lhs << ", " << r.tau_abs_x << ") ";
  }
  o.detail = d.str();
  return o;
}

Outcome core() {
  const RunResult r = run_suite("goodlambda-core", 1000, {}, 2024);
  bool ok = r.summary.failures == 0;
  // Margin threshold -1e-8 (1 + rhs).
  for (const auto& row : r.rows) ok = ok && row.margin >= -1e-8 * (1.0 + row.rhs);
  return {ok, summary(r)};
}

Outcome tail() {
  const RunResult r = run_suite("goodlambda-tail", 1000, {}, 2024);
  return {r.summary.failures == 0, summary(r) + " (beta in {1.5, 2, 4})"};
}

Outcome moment() {
  const RunResult r = run_suite("moment", 200, {3, 4, 8}, 77);
  std::size_t fubini = 0, fubini_bad = 0;
  for (const auto& row : r.rows) {
    if (row.instance.find("fubini") == std::string::npos) continue;
    ++fubini;
    if (!row.pass) ++fubini_bad;
  }
  std::ostringstream d;
  d << summary(r) << "; fubini rows " << fubini << " (" << fubini_bad << " above 1e-6)";
  return {r.summary.failures == 0 && fubini >= 50 && fubini_bad == 0, d.str()};
}

Outcome constants() {
  Outcome o;
  std::ostringstream d;
  for (double p : {2.1, 3.0, 4.0, 8.0, 16.0, 64.0}) {
    const double B = 1.0 + 1.0 / p;
    const MomentConstant m = moment_constant(p, B);
    const double bound = 12.0 * p / std::sqrt(1.0 - std::pow(B, 2.0 - p));
    if (!(m.C_pB <= bound * (1 + 1e-12))) o.pass = false;
    d << "p=" << p << " " << m.C_pB << "<=" << bound << " ";
  }
  const double s4 = moment_constant(4.0, 1.25).simplified;
  if (std::abs(s4 - 80.0) > 1e-9) o.pass = false;
  d << "| simplified(4) = " << s4;
  o.detail = d.str();
  return o;
}

Outcome bg() {
  const RunResult r = run_suite("bg", 500, {3, 4, 8}, 4041);
  return {r.summary.failures == 0, summary(r)};
}

Outcome applications() {
  Outcome o;
  std::ostringstream d;
  for (const char* s : {"transform", "doob", "stein", "dominated", "positive-tangent", "refined-doob"}) {
    const RunResult r = run_suite(s, 200, {3, 4}, 4300);
    if (r.summary.failures != 0) o.pass = false;
    d << s << " " << r.summary.rows << "/" << r.summary.failures << " ";
  }
  o.detail = d.str() + "(rows/failures)";
  return o;
}

Outcome oracle() {
  std::vector<Filtration> fam;
  fam.push_back(families::trivial_full(8));
  fam.push_back(families::corner(8));
  fam.push_back(families::rademacher(6));
  fam.push_back(families::rademacher_matrix(4, 4));
  fam.push_back(families::rademacher_full(4, 4));
  fam.push_back(families::rademacher_corner(3, 4));
  fam.push_back(families::corner(4).prepend(TracialAlgebra::matrix(2), {ce::Full{}, ce::Full{}, ce::Full{}, ce::Full{},
                                                                         ce::Full{}},
                                            "matrix-corner"));
  fam.push_back(families::rademacher_matrix(3, 2).prepend(TracialAlgebra::matrix(2),
                                                          {ce::Trivial{}, ce::Full{}, ce::Full{}, ce::Full{}}, "mixed"));
  Outcome o;
  std::ostringstream d;
  Rng rng(808);
  for (const Filtration& f : fam) {
    double worst = 0;
    for (int t = 0; t < 200; ++t) {
      const int n = static_cast<int>(rng.below(static_cast<std::uint64_t>(f.N() + 1)));
      const Operator x = random_operator(f.algebra(), rng);
      worst = std::max(worst, max_diff(f.cond_exp(n, x), ce_oracle(f, n, x)));
    }
    if (!(worst <= 1e-9) || f.algebra()->total_dim() > 64) o.pass = false;
    d << f.name() << "(" << f.algebra()->total_dim() << ") " << worst << " ";
  }
  o.detail = d.str();
  return o;
}

Outcome invariants() {
  Outcome o;
  std::size_t bad = 0;
  for (const auto& r : g_rows)
    if (!r.defects_ok) ++bad;
  // Diagonal martingales: corrected and uncorrected projections coincide.
  Rng rng(909);
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    FiltrationPtr f = share(families::rademacher(1 + static_cast<int>(rng.below(5))));
    const Martingale y = martingale_from_final(f, rng.uniform(0.5, 4.0) * random_hermitian(f->algebra(), rng));
    const CorrectedSeq c = corrected_P(y, 1.0 + rng.uniform(0.1, 1.0));
    for (int k = c.k_min; k <= c.k_top; ++k)
      for (int n = 0; n <= c.N(); ++n)
        worst = std::max(worst, max_diff(c.at(n, k).op(), c.R[static_cast<std::size_t>(k - c.k_min)].R(n).op()));
  }
  std::ostringstream d;
  d << g_rows.size() << " rows from criteria 2-7 and 10, " << bad << " with Cuculescu defects; max |P - R| on diagonal "
    << worst;
  if (g_rows.empty()) d << " (run together with criteria 2-7 for the row check)";
  o.pass = bad == 0 && worst == 0.0;
  o.detail = d.str();
  return o;
}

Outcome schur() {
  Outcome o;
  std::ostringstream d;
  Rng rng(1010);
  int exact = 0;
  for (int t = 0; t < 100; ++t) {
    const Index n = 2 + static_cast<Index>(rng.below(15));
    const Matrix a = random_matrix(n, rng);
    if (schur_multiply(Pattern::interlace_pattern(n), interlace_t(a)) == interlace_t(triangular_projection(a))) ++exact;
  }
  if (exact != 100) o.pass = false;
  d << "t identity " << exact << "/100; ";

  const RunResult r = run_suite("schur-reversed-l", 200, {4}, 1011, {8});
  std::size_t identity_rows = 0;
  for (const auto& row : r.rows)
    if (row.instance.find("identity") != std::string::npos) ++identity_rows;
  if (r.summary.failures != 0 || identity_rows != 200) o.pass = false;
  d << summary(r) << "; ";

  const Pattern tri = Pattern::triangular(32);
  double prev = 0;
  for (double p : {4.0, 8.0, 16.0}) {
    const double v = schur_norm_lower(tri, p, 200, 7).value;
    const double up = schur_upper_constant(tri, p);
    if (v < prev || v > up) o.pass = false;
    d << "p=" << p << " " << v << "<=" << up << " ";
    prev = v;
  }
  o.detail = d.str();
  return o;
}

Outcome determinism() {
  Outcome o;
  std::ostringstream d;
  for (const auto& s : suite_names()) {
    ExperimentConfig c;
    c.suite = s;
    c.trials = 4;
    c.seed = 1111;
    if (s == "schur-norms") {
      c.dims = {12};
      c.trials = 1;
    }
    if (s == "tangent-counterexample") c.dims = {3, 5};
    c.threads = 1;
    const std::string a = to_csv(run(c).rows);
    c.threads = 3;
    const std::string b = to_csv(run(c).rows);
    const std::string e = to_csv(run(c).rows);
    if (a != b || b != e) {
      o.pass = false;
      d << s << " differs; ";
    }
  }
  d << suite_names().size() << " suites re-run (1 and 3 threads)";
  o.detail = d.str();
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // runtime limit, 0 if none
  std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "counterexample reproduction", 60, counterexample},
      {2, "core good-lambda", 120, core},
      {3, "tail good-lambda", 300, tail},
      {4, "moment bound", 0, moment},
      {5, "constants", 0, constants},
      {6, "BG both directions", 0, bg},
      {7, "transforms, Doob, Stein, tangent sums", 0, applications},
      {8, "conditional-expectation oracle", 0, oracle},
      {9, "Cuculescu invariants", 0, invariants},
      {10, "Schur multipliers", 0, schur},
      {11, "determinism", 0, determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += " (over the time limit)";
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %d: %s [%.1fs] %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
