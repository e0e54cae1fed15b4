#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "applications.hpp"
#include "errors.hpp"
#include "goodlambda.hpp"
#include "instances.hpp"
#include "schur.hpp"

namespace ncgl {

namespace {

using json = nlohmann::json;

struct Suite {
  std::vector<double> default_p;
  std::vector<long long> default_dims;
  double p_min;  // smallest admissible p
  bool p_min_open;
  std::string help;
  std::vector<std::string> constants;
};

const std::map<std::string, Suite>& suites() {
  static const std::map<std::string, Suite> s = {
      {"goodlambda-core",
       {{}, {}, 0, false, "random strong-testing triples; core good-lambda inequality at level 1",
        {"tau((I-R_N)(y_N-I)^2) <= 2 tau((I-R_N)(x^2+z^2))"}}},
      {"goodlambda-tail",
       {{}, {}, 0, false, "random strong-testing triples; tail inequality for beta in {1.5,2,4} (or --beta)",
        {"tau(I-Q_N) <= 4 (beta-1)^-2 tau((I-R_N)(x^2+z^2))"}}},
      {"moment",
       {{3, 4, 8}, {}, 2, true, "BG triples x=z=S_N(y); maximal and moment bounds, B = 1+1/p (or --B)",
        {"C_{p,B} = (2p B^(p-1)(B-1)/(1-B^-p))^(1/p) * 2 B^(p/2) (B-1)^-1 / (1-B^(2-p))^(1/2)",
         "C_main(p) = 12p / (1-(1+1/p)^(2-p))^(1/2)"}}},
      {"bg",
       {{3, 4, 8}, {2, 5}, 2, false, "random corner martingales, dims = [dmin, dmax]; both directions and interpolation",
        {"upper: 2^(1/2) C_main(p)", "lower: 12p (1+2^(2-4/p))^(1/2) (1+2^(p-2))^(1/p) / (1-(1+1/p)^(2-p))^(1/2)",
         "interp: 2^(1-2/p)", "p = 2: 1"}}},
      {"transform",
       {{3, 4}, {}, 1, true, "random martingales on small filtrations, v alternating or uniform in [-1,1]",
        {"C_main(p) (1+2^(2-4/p))^(1/2)", "1 < p < 2: duality check with C_{p'}"}}},
      {"doob",
       {{3, 4}, {}, 1, false, "random PSD (not adapted) sequences; dual Doob at q = p",
        {"(2^(1/2) C_main(2q) 2^(1/(2q)))^2", "q = 1: 1"}}},
      {"stein",
       {{3, 4}, {}, 2, false, "random sequences; Stein inequality", {"dual_doob(p/2)^(1/2)", "p = 2: 1"}}},
      {"tangent-counterexample",
       {{1.5}, {3, 5, 7, 9, 11, 13}, 1, false, "dims = odd N in [1,13]; exact trace quantities",
        {"tau(I_[1,inf)(|y_N|)) = N+1", "tau(|x_N|) = 2 N^(1/2)",
         "||y_N||_p / ||x_N||_p >= (N+1)^(1/p) / (2^(1/p) N^(1/2))"}}},
      {"dominated",
       {{3, 4}, {}, 2, false, "arrow and sign tangent pairs", {"C_main(p) (1+kappa^2 2^(2-4/p))^(1/2)", "p = 2: 1"}}},
      {"positive-tangent",
       {{3, 4}, {}, 1, false, "diagonal and arrow positive tangent pairs",
        {"p >= 2: 1 + 2 C_dom(p, (1+kappa)/2)", "p < 2: (C_lower(2p) C_dom(2p) C_upper(2p))^2"}}},
      {"refined-doob",
       {{3, 4}, {}, 1, false, "adapted PSD sequences on small filtrations",
        {"p >= 2: (1 + 3 C_pos(p))/2", "p < 2: dual_doob(p)"}}},
      {"schur-reversed-l",
       {{4}, {8}, 2, false, "random reversed-L patterns and self-adjoint a, dims = N",
        {"(1 + C_dom(p))/2 (+1 if some n_i = 0)", "m^(N)*a = (a_N+b_N)/2"}}},
      {"schur-norms",
       {{4, 8, 16}, {32}, 1, true, "lower bounds for the triangular projection, dims = N",
        {"upper: 2((1 + C_dom(max(p,p')))/2 + 1)"}}},
  };
  return s;
}

const Suite& suite_of(const std::string& name) {
  auto it = suites().find(name);
  if (it == suites().end()) fail(ErrorCode::Config, "unknown suite '" + name + "'");
  return it->second;
}

std::vector<double> p_values(const ExperimentConfig& c) {
  return c.p_grid.empty() ? suite_of(c.suite).default_p : c.p_grid;
}

std::vector<long long> dim_values(const ExperimentConfig& c) {
  return c.dims.empty() ? suite_of(c.suite).default_dims : c.dims;
}

ReportRow to_row(const std::string& suite, int trial, const VerifyReport& r, std::uint64_t seed) {
  ReportRow row;
  row.suite = suite;
  std::ostringstream id;
  id << "t" << trial << ":" << r.name;
  if (!r.meta.empty()) id << " " << r.meta;
  row.instance = id.str();
  row.seed = seed;
  row.lhs = r.lhs;
  row.rhs = r.rhs;
  row.constant = r.constant;
  row.margin = r.margin;
  row.pass = r.pass;
  row.flag = to_string(r.flag);
  row.defects_ok = r.defects.ok();
  return row;
}

// Row for a defect that must not exceed `bound`.
ReportRow defect_row(const std::string& suite, int trial, const std::string& name, double defect, double bound,
                     std::uint64_t seed, bool defects_ok = true) {
  ReportRow row;
  row.suite = suite;
  row.instance = "t" + std::to_string(trial) + ":" + name;
  row.seed = seed;
  row.lhs = defect;
  row.rhs = bound;
  row.constant = 1.0;
  row.margin = bound - defect;
  row.pass = defect <= bound;
  row.defects_ok = defects_ok;
  return row;
}

// Row for an exact value against its closed form.
ReportRow exact_row(const std::string& suite, int trial, const std::string& name, double value, double expected,
                    double tol, std::uint64_t seed) {
  ReportRow row;
  row.suite = suite;
  row.instance = "t" + std::to_string(trial) + ":" + name;
  row.seed = seed;
  row.lhs = value;
  row.rhs = expected;
  row.constant = tol;
  row.margin = tol - std::abs(value - expected);
  row.pass = std::abs(value - expected) <= tol;
  return row;
}

std::vector<Operator> psd_sequence(const FiltrationPtr& f, Rng& rng, bool adapted) {
  std::vector<Operator> u;
  for (int n = 0; n <= f->N(); ++n) {
    Operator a = random_psd(f->algebra(), rng);
    u.push_back(adapted ? f->cond_exp(n, a).mark_hermitian() : a);
  }
  return u;
}

using TrialFn = std::function<std::vector<ReportRow>(const ExperimentConfig&, int, Rng&, std::uint64_t)>;

std::vector<ReportRow> trial_rows(const ExperimentConfig& c, int t, Rng& rng, std::uint64_t seed) {
  const std::string& s = c.suite;
  std::vector<ReportRow> rows;
  auto add = [&](const VerifyReport& r) { rows.push_back(to_row(s, t, r, seed)); };
  if (s == "goodlambda-core") {
    add(verify_core(random_strong_triple(rng), seed));
  } else if (s == "goodlambda-tail") {
    const Triple tr = random_strong_triple(rng);
    const std::vector<double> betas = c.beta ? std::vector<double>{*c.beta} : std::vector<double>{1.5, 2.0, 4.0};
    for (double b : betas) add(verify_tail(tr, b, seed));
  } else if (s == "moment") {
    FiltrationPtr f = random_small_filtration(rng);
    const Triple tr = bg_triple(random_scaled_martingale(f, rng, rng.uniform(0.3, 4.0)));
    for (double p : p_values(c)) {
      const MomentReport m = verify_moment(tr, p, c.B ? *c.B : 1.0 + 1.0 / p, seed);
      add(m.max_plus);
      add(m.max_minus);
      add(m.final_pB);
      add(m.final_main);
      std::ostringstream tag;
      tag << " p=" << p;
      const bool ok = m.max_plus.defects.ok();
      rows.push_back(defect_row(s, t, "fubini-plus" + tag.str(), m.fubini_plus, 1e-6, seed, ok));
      rows.push_back(defect_row(s, t, "fubini-minus" + tag.str(), m.fubini_minus, 1e-6, seed, ok));
      rows.push_back(defect_row(s, t, "distribution" + tag.str(), m.distribution, 1e-8, seed, ok));
    }
  } else if (s == "bg") {
    const auto d = dim_values(c);
    FiltrationPtr f = random_corner_filtration(rng, d.front(), d.back());
    const Martingale x = scale(random_martingale(f, rng), rng.uniform(0.1, 5.0));
    for (double p : p_values(c)) {
      const BGReport r = verify_bg(x, p, false, seed);
      add(r.upper);
      add(r.lower);
      add(r.interp);
    }
  } else if (s == "transform") {
    FiltrationPtr f = random_small_filtration(rng);
    const Martingale x = random_martingale(f, rng);
    std::vector<double> v;
    for (int n = 0; n <= x.N(); ++n) v.push_back(t % 2 ? rng.uniform(-1.0, 1.0) : (n % 2 ? -1.0 : 1.0));
    for (double p : p_values(c)) add(verify_transform(x, v, p, seed));
  } else if (s == "doob") {
    FiltrationPtr f = random_small_filtration(rng);
    const auto u = psd_sequence(f, rng, false);
    for (double p : p_values(c)) add(verify_dual_doob(u, f, p, false, seed).main);
  } else if (s == "stein") {
    FiltrationPtr f = random_small_filtration(rng);
    std::vector<Operator> u;
    for (int n = 0; n <= f->N(); ++n) u.push_back(random_operator(f->algebra(), rng));
    for (double p : p_values(c)) add(verify_stein(u, f, p, seed));
  } else if (s == "tangent-counterexample") {
    const int N = static_cast<int>(dim_values(c).at(static_cast<std::size_t>(t)));
    for (double p : p_values(c)) {
      const CounterexampleReport r = tangent_counterexample(N, p);
      std::ostringstream tag;
      tag << " N=" << N << " p=" << p;
      rows.push_back(exact_row(s, t, "tau-weak-y" + tag.str(), r.weak_lhs, N + 1.0, 1e-8, seed));
      rows.push_back(exact_row(s, t, "tau-abs-x" + tag.str(), r.tau_abs_x, 2.0 * std::sqrt(N), 1e-9, seed));
      VerifyReport norms = make_report("norm-ratio", r.lower_ratio, r.norm_ratio, r.ratio, tag.str().substr(1), seed);
      norms.flag = r.tangency.tangent ? HypothesisFlag::StrongPass : HypothesisFlag::Unverified;
      add(norms);
    }
  } else if (s == "dominated") {
    const MartingalePair pr = t % 2 ? sign_tangent_pair(rng, static_cast<int>(1 + rng.below(3)), 2)
                                    : corner_tangent_pair(rng, static_cast<Index>(2 + rng.below(4)));
    for (double p : p_values(c)) add(verify_dominated(pr.x, pr.y, p, 1.0, seed));
  } else if (s == "positive-tangent") {
    const PositivePair pr = t % 2 ? diagonal_positive_pair(rng, static_cast<int>(1 + rng.below(3)), 2)
                                  : arrow_positive_pair(rng, static_cast<Index>(2 + rng.below(4)));
    for (double p : p_values(c)) add(verify_positive_tangent(pr.u, pr.v, *pr.filtration, p, false, 1.0, seed));
  } else if (s == "refined-doob") {
    FiltrationPtr f = random_small_filtration(rng);
    const auto u = psd_sequence(f, rng, true);
    for (double p : p_values(c)) add(refined_doob(u, *f, p, seed));
  } else if (s == "schur-reversed-l") {
    const Index N = static_cast<Index>(dim_values(c).front());
    std::vector<int> m(static_cast<std::size_t>(N)), n(static_cast<std::size_t>(N));
    for (auto& b : m) b = static_cast<int>(rng.below(2));
    for (auto& b : n) b = static_cast<int>(rng.below(2));
    const Pattern pat = Pattern::reversed_L(m, n);
    Matrix g(N, N);
    for (Index j = 0; j < N; ++j)
      for (Index i = 0; i < N; ++i) g(i, j) = rng.complex_gaussian();
    const Matrix a = 0.5 * (g + g.adjoint());
    for (double p : p_values(c)) {
      const ReversedLTrial r = verify_reversed_L_once(pat, p, a, seed);
      add(r.report);
      std::ostringstream tag;
      tag << " N=" << N << " p=" << p;
      rows.push_back(defect_row(s, t, "identity" + tag.str(), r.identity_defect, 1e-12, seed));
    }
  } else if (s == "schur-norms") {
    const Pattern tri = Pattern::triangular(static_cast<Index>(dim_values(c).front()));
    for (double p : p_values(c)) {
      const NormLowerBound lb = schur_norm_lower(tri, p, c.budget, seed);
      const double up = schur_upper_constant(tri, p);
      std::ostringstream meta;
      meta << "triangular N=" << tri.size() << " p=" << p;
      add(make_report("norm-lower", lb.value, up, up, meta.str(), seed));
    }
  } else {
    fail(ErrorCode::Config, "unknown suite '" + s + "'");
  }
  return rows;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);
}

double from_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : suites()) v.push_back(k);
    return v;
  }();
  return names;
}

std::string suite_help(const std::string& suite) { return suite_of(suite).help; }

void validate(const ExperimentConfig& c) {
  const Suite& s = suite_of(c.suite);
  require(c.trials >= 1, ErrorCode::Config, "trials must be >= 1");
  require(c.budget >= 1, ErrorCode::Config, "budget must be >= 1");
  require(c.threads >= 0, ErrorCode::Config, "threads must be >= 0");
  for (double p : p_values(c)) {
    const bool ok = std::isfinite(p) && (s.p_min_open ? p > s.p_min : p >= s.p_min);
    if (!ok) {
      std::ostringstream msg;
      msg << "p = " << p << " is outside the domain of suite " << c.suite << " (p " << (s.p_min_open ? ">" : ">=")
          << " " << s.p_min << ")";
      fail(ErrorCode::Domain, msg.str());
    }
  }
  if (c.B) require(*c.B > 1.0, ErrorCode::Domain, "B must be > 1");
  if (c.beta) require(*c.beta > 1.0, ErrorCode::Domain, "beta must be > 1");
  const auto d = dim_values(c);
  if (c.suite == "bg") {
    require(d.size() == 2 && d[0] >= 1 && d[0] <= d[1] && d[1] <= 8, ErrorCode::Config,
            "bg: dims must be [dmin, dmax] with 1 <= dmin <= dmax <= 8");
  } else if (c.suite == "tangent-counterexample") {
    require(!d.empty(), ErrorCode::Config, "tangent-counterexample: dims lists the values of N");
    for (long long N : d)
      require(N >= 1 && N <= 13 && N % 2 == 1, ErrorCode::Domain, "tangent-counterexample: N must be odd, 1..13");
  } else if (c.suite == "schur-reversed-l" || c.suite == "schur-norms") {
    require(d.size() == 1 && d[0] >= 1 && d[0] <= 128, ErrorCode::Config, c.suite + ": dims must be one N in 1..128");
  }
}

int worker_count(int requested) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("NCGL_THREADS")) n = std::atoi(env);
  }
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, n);
}

RunResult run(const ExperimentConfig& c) {
  validate(c);
  const int trials = c.suite == "tangent-counterexample" ? static_cast<int>(dim_values(c).size()) : c.trials;
  std::vector<std::vector<ReportRow>> per_trial(static_cast<std::size_t>(trials));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(trials));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < trials; t = next++) {
      try {
        Rng rng = Rng::stream(c.seed, static_cast<std::uint64_t>(t));
        const std::uint64_t trial_seed = Rng::mix(c.seed ^ static_cast<std::uint64_t>(t));
        const auto start = std::chrono::steady_clock::now();
        auto rows = trial_rows(c, t, rng, trial_seed);
        if (c.timing) {
          const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
          for (auto& r : rows) r.ms = ms;
        }
        per_trial[static_cast<std::size_t>(t)] = std::move(rows);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    }
  };
  const int nthreads = std::min(worker_count(c.threads), trials);
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  RunResult out;
  out.config = c;
  out.summary.min_margin = kInf;
  for (auto& rows : per_trial)
    for (auto& r : rows) out.rows.push_back(std::move(r));
  for (const auto& r : out.rows) {
    if (!r.pass) ++out.summary.failures;
    out.summary.min_margin = std::min(out.summary.min_margin, r.margin);
    out.summary.defects_ok = out.summary.defects_ok && r.defects_ok;
  }
  out.summary.rows = out.rows.size();
  out.summary.constants = suite_of(c.suite).constants;
  return out;
}

std::string to_csv(const std::vector<ReportRow>& rows) {
  std::string s = "suite,instance,seed,lhs,rhs,constant,margin,pass,ms\n";
  for (const auto& r : rows) {
    s += csv_field(r.suite) + "," + csv_field(r.instance) + "," + std::to_string(r.seed) + "," + fmt(r.lhs) + "," +
         fmt(r.rhs) + "," + fmt(r.constant) + "," + fmt(r.margin) + "," + (r.pass ? "1" : "0") + "," + fmt(r.ms) + "\n";
  }
  return s;
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["suite"] = c.suite;
  j["p_grid"] = c.p_grid;
  j["dims"] = c.dims;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  if (c.B) j["B"] = *c.B;
  if (c.beta) j["beta"] = *c.beta;
  j["budget"] = c.budget;
  j["timing"] = c.timing;
  j["threads"] = c.threads;
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
  }
  require(j.is_object(), ErrorCode::Config, "config must be a JSON object");
  static const std::vector<std::string> known = {"suite", "p_grid", "dims", "trials", "seed", "B",
                                                 "beta",  "budget", "timing", "threads"};
  for (const auto& [k, _] : j.items())
    require(std::find(known.begin(), known.end(), k) != known.end(), ErrorCode::Config, "unknown config key '" + k + "'");
  ExperimentConfig c;
  try {
    c.suite = j.value("suite", std::string{});
    if (j.contains("p_grid")) c.p_grid = j["p_grid"].get<std::vector<double>>();
    if (j.contains("dims")) c.dims = j["dims"].get<std::vector<long long>>();
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    if (j.contains("B")) c.B = j["B"].get<double>();
    if (j.contains("beta")) c.beta = j["beta"].get<double>();
    c.budget = j.value("budget", c.budget);
    c.timing = j.value("timing", c.timing);
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string("config has a field of the wrong type: ") + e.what());
  }
  return c;
}

std::string to_json(const RunResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"suite", row.suite},
                    {"instance", row.instance},
                    {"seed", row.seed},
                    {"lhs", number(row.lhs)},
                    {"rhs", number(row.rhs)},
                    {"constant", number(row.constant)},
                    {"margin", number(row.margin)},
                    {"pass", row.pass},
                    {"ms", number(row.ms)},
                    {"flag", row.flag},
                    {"defects_ok", row.defects_ok}});
  }
  json j;
  j["config"] = json::parse(config_to_json(r.config));
  j["summary"] = {{"rows", r.summary.rows},
                  {"failures", r.summary.failures},
                  {"min_margin", number(r.summary.min_margin)},
                  {"defects_ok", r.summary.defects_ok},
                  {"constants", r.summary.constants}};
  j["rows"] = rows;
  // 17 significant digits round-trip every double.
  return j.dump(2) + "\n";
}

std::vector<ReportRow> rows_from_json(const std::string& text) {
  std::vector<ReportRow> out;
  try {
    const json j = json::parse(text);
    for (const auto& r : j.at("rows")) {
      ReportRow row;
      row.suite = r.at("suite").get<std::string>();
      row.instance = r.at("instance").get<std::string>();
      row.seed = r.at("seed").get<std::uint64_t>();
      row.lhs = from_number(r.at("lhs"));
      row.rhs = from_number(r.at("rhs"));
      row.constant = from_number(r.at("constant"));
      row.margin = from_number(r.at("margin"));
      row.pass = r.at("pass").get<bool>();
      row.ms = from_number(r.at("ms"));
      row.flag = r.value("flag", std::string("n/a"));
      row.defects_ok = r.value("defects_ok", true);
      out.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string("report JSON: ") + e.what());
  }
  return out;
}

void emit(const RunResult& r, const std::string& format, const std::string& path) {
  require(format == "csv" || format == "json", ErrorCode::Config, "format must be csv or json");
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  os << (format == "csv" ? to_csv(r.rows) : to_json(r));
  os.flush();
  if (!os) fail(ErrorCode::Io, "failed writing '" + path + "'");
}

}  // namespace ncgl
