#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "neumann/errormap.hpp"
#include "neumann/kernels.hpp"
#include "neumann/matrix.hpp"
#include "neumann/series.hpp"

namespace neumann::bench {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Tabular output

enum class Format { csv, json, table };

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  if (s == "table") return Format::table;
  throw std::invalid_argument("unknown format '" + s + "'");
}

/// Fixed column order; cells are JSON scalars.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  void add(std::vector<json> row) {
    if (row.size() != columns.size()) throw std::logic_error("Table: row width does not match columns");
    rows.push_back(std::move(row));
  }
  std::size_t column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("Table: no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }
  const json& at(std::size_t row, const std::string& name) const { return rows.at(row).at(column(name)); }
};

inline std::string format_cell(const json& v, bool compact) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, compact ? "%.4g" : "%.17g", v.get<double>());
    return buf;
  }
  return v.dump();
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string render(const Table& t, Format f) {
  std::ostringstream os;
  switch (f) {
    case Format::csv: {
      for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_escape(t.columns[i]);
      os << '\n';
      for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_escape(format_cell(r[i], false));
        os << '\n';
      }
      break;
    }
    case Format::json: {
      json arr = json::array();
      for (const auto& r : t.rows) {
        json o = json::object();
        for (std::size_t i = 0; i < r.size(); ++i) o[t.columns[i]] = r[i];
        arr.push_back(std::move(o));
      }
      os << arr.dump(2) << '\n';
      break;
    }
    case Format::table: {
      std::vector<std::size_t> w(t.columns.size());
      std::vector<std::vector<std::string>> cells;
      for (std::size_t i = 0; i < t.columns.size(); ++i) w[i] = t.columns[i].size();
      for (const auto& r : t.rows) {
        auto& line = cells.emplace_back();
        for (std::size_t i = 0; i < r.size(); ++i) {
          line.push_back(format_cell(r[i], true));
          w[i] = std::max(w[i], line.back().size());
        }
      }
      auto emit = [&](const std::vector<std::string>& line) {
        for (std::size_t i = 0; i < line.size(); ++i) {
          os << (i ? "  " : "") << line[i] << std::string(w[i] - line[i].size(), ' ');
        }
        os << '\n';
      };
      emit(t.columns);
      std::vector<std::string> rule;
      for (auto x : w) rule.emplace_back(x, '-');
      emit(rule);
      for (const auto& line : cells) emit(line);
      break;
    }
  }
  return os.str();
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Callers write results
/// by index, so output order never depends on scheduling.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
}

inline std::string spec_summary(const SpectrumSpec& s) {
  char buf[160];
  switch (s.kind) {
    case SpectrumKind::normal_random:
      std::snprintf(buf, sizeof buf, "normal-random d=%d alpha=%g seed=%llu", s.dim, s.alpha,
                    static_cast<unsigned long long>(s.seed));
      break;
    case SpectrumKind::normal_geometric:
      std::snprintf(buf, sizeof buf, "normal-geometric d=%d lambda=[%g,%g]%s seed=%llu", s.dim, s.lambda_min,
                    s.lambda_max, s.complement ? " complement" : "", static_cast<unsigned long long>(s.seed));
      break;
    case SpectrumKind::nonnormal_triangular:
      std::snprintf(buf, sizeof buf, "nonnormal-triangular d=%d rho=%g kappa=%g nu=%g seed=%llu", s.dim, s.rho,
                    s.kappa_target, s.nu, static_cast<unsigned long long>(s.seed));
      break;
  }
  return buf;
}

// ---------------------------------------------------------------------------
// Methods

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"naive",  "binary",  "ternary",    "quinary",
                                              "radix9", "radix15", "radix15-hp", "hensel"};
  return names;
}

/// Methods with a radix stepper, in the order used by the convergence and
/// threshold studies.
inline const std::vector<std::string>& radix_methods() {
  static const std::vector<std::string> names{"binary", "ternary", "quinary", "radix9", "radix15", "radix15-hp"};
  return names;
}

inline int method_radix(const std::string& method) {
  if (method == "binary" || method == "hensel") return 2;
  if (method == "ternary") return 3;
  if (method == "quinary") return 5;
  if (method == "radix9") return 9;
  if (method == "radix15" || method == "radix15-hp") return 15;
  throw std::invalid_argument("method '" + method + "' has no fixed radix");
}

/// binary/ternary: naive splitting; quinary/radix9: exact telescoping;
/// radix15/radix15-hp/hensel: residual iteration.
inline SeriesRun make_run(const std::string& method, const DenseMatrix& A, SeriesOptions opt = {}) {
  if (method == "binary") return SeriesRun::splitting(A, 2, opt);
  if (method == "ternary") return SeriesRun::splitting(A, 3, opt);
  if (method == "quinary") return SeriesRun::telescoping(A, builtin(5), opt);
  if (method == "radix9") return SeriesRun::telescoping(A, builtin(9), opt);
  if (method == "radix15") return SeriesRun::residual(A, kernels::radix15_fixture(), opt);
  if (method == "radix15-hp") return SeriesRun::residual(A, kernels::radix15_regenerated(), opt);
  if (method == "hensel") return SeriesRun::residual(A, to_float(kernels::binary()), opt);
  throw std::invalid_argument("unknown method '" + method + "'");
}

struct RunRecord {
  std::string method;
  int m = 0;
  int t = 0;
  std::uint64_t k = 0;
  int dim = 0;
  std::string spec;
  long long products_model = 0;
  long long products_actual = 0;
  double residual_fro = 0.0;
  double residual_normalized = 0.0;
  double elapsed_ms = 0.0;  // median over repeats, informational
  std::uint64_t seed = 0;
};

inline json to_json(const RunRecord& r) {
  return json{{"method", r.method},
              {"m", r.m},
              {"t", r.t},
              {"k", r.k},
              {"dim", r.dim},
              {"spec", r.spec},
              {"products_model", r.products_model},
              {"products_actual", r.products_actual},
              {"residual_fro", r.residual_fro},
              {"residual_normalized", r.residual_normalized},
              {"elapsed_ms", r.elapsed_ms},
              {"seed", r.seed}};
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// One evaluation of S_k(A). For `naive`, k is taken from `naive_k` (m = k,
/// t = 1); every other method computes k = m^t.
inline RunRecord run_method(const std::string& method, const DenseMatrix& A, int t, int repeat = 1,
                            int naive_k = 0) {
  if (repeat < 1) throw std::invalid_argument("repeat must be >= 1");
  RunRecord rec;
  rec.method = method;
  rec.dim = A.dim();
  std::vector<double> times;
  DenseMatrix S;
  for (int r = 0; r < repeat; ++r) {
    GemmCounter counter;
    const auto t0 = std::chrono::steady_clock::now();
    if (method == "naive") {
      if (naive_k < 1) throw std::invalid_argument("naive: k must be >= 1");
      S = eval_naive(A, naive_k, counter);
      rec.m = naive_k;
      rec.t = 1;
      rec.k = static_cast<std::uint64_t>(naive_k);
      rec.products_model = naive_k - 1;
    } else {
      if (t < 1) throw std::invalid_argument("t must be >= 1");
      auto run = make_run(method, A);
      run.run(t, counter);
      auto st = std::move(run).take_state();
      rec.m = st.radix;
      rec.t = t;
      rec.k = st.k();
      rec.products_model = st.ledger.model();
      if (st.ledger.actual() != static_cast<long long>(counter.count())) {
        throw std::logic_error("ledger total differs from the product counter");
      }
      S = std::move(st.sum);
    }
    times.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    rec.products_actual = static_cast<long long>(counter.count());
  }
  rec.elapsed_ms = median(std::move(times));
  rec.residual_fro = residual_fro(A, S);
  rec.residual_normalized = rec.residual_fro / std::sqrt(static_cast<double>(A.dim()));
  return rec;
}

// ---------------------------------------------------------------------------
// Commands

struct VerifyResult {
  Table table;
  bool ok = true;
};

/// One row per registry entry. Exactness claims: binary, ternary, quinary and
/// radix9 must be exact; radix15-hp must have prefix error below 1e-5.
inline VerifyResult cmd_verify() {
  VerifyResult out;
  out.table.columns = {"name",     "m",         "mu", "lower_bound", "bound_met", "prefix_error",
                       "spillover", "c", "exact", "claim", "ok"};
  for (const auto& e : registry()) {
    const auto rep = e.report();
    json mu = nullptr, bound_met = nullptr;
    if (e.has_circuit()) {
      mu = e.products();
      bound_met = e.products() == min_products_lower_bound(e.radix);
    }
    std::string head;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, rep.spillover.size()); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s%.4g", i ? " " : "", rep.spillover[i]);
      head += buf;
    }
    if (rep.spillover.size() > 3) head += " ...";
    std::string claim = "measured";
    bool ok = true;
    if (e.is_exact_domain()) {
      claim = "exact";
      ok = verify_exact(e) && rep.exact;
    } else if (e.name == "radix15-hp") {
      claim = "prefix_error<1e-5";
      ok = rep.prefix_error < 1e-5;
    }
    out.ok = out.ok && ok;
    out.table.add({e.name, e.radix, mu, min_products_lower_bound(e.radix), bound_met, rep.prefix_error, head,
                   rep.c, rep.exact, claim, ok});
  }
  return out;
}

/// Update cost C(m) = mu + 2 and products per doubling C(m) / log2 m.
inline Table cmd_costs() {
  Table t;
  t.columns = {"name", "m", "mu", "cost", "coefficient"};
  for (int m : {2, 3, 5, 9, 15}) {
    const auto e = builtin(m);
    const auto p = predict_cost(m, e.products(), 1);
    t.add({e.name, m, e.products(), p.total, p.coefficient});
  }
  return t;
}

struct Table2Row {
  std::uint64_t k;
  std::string method;
  int t;
};

inline const std::vector<Table2Row>& table2_rows() {
  static const std::vector<Table2Row> rows{{125, "quinary", 3}, {625, "quinary", 4}, {81, "radix9", 2},
                                           {729, "radix9", 3},  {225, "radix15", 2}, {3375, "radix15", 3}};
  return rows;
}

inline int ceil_log2(std::uint64_t k) {
  int t = 0;
  while ((std::uint64_t{1} << t) < k) ++t;
  return t;
}

struct Table2Options {
  int dim = 500;
  double alpha = 0.9;
  std::uint64_t seed = 1;
  int repeat = 10;
  bool nonnormal = false;  // add residuals on a nonnormal-triangular matrix with rho = alpha
  double nu = 0.0;         // its strictly-upper scale; 0 means 1 / sqrt(dim)
  int jobs = 1;
};

/// Product counts at pure powers against the binary baseline 2 ceil(log2 k).
inline Table cmd_table2(const Table2Options& o) {
  SpectrumSpec spec;
  spec.kind = SpectrumKind::normal_random;
  spec.dim = o.dim;
  spec.alpha = o.alpha;
  spec.seed = o.seed;
  const auto A = generate(spec).matrix;
  std::optional<DenseMatrix> N;
  if (o.nonnormal) {
    SpectrumSpec ns;
    ns.kind = SpectrumKind::nonnormal_triangular;
    ns.dim = o.dim;
    ns.rho = o.alpha;
    ns.nu = o.nu > 0.0 ? o.nu : 1.0 / std::sqrt(static_cast<double>(o.dim));
    ns.seed = o.seed;
    N = generate(ns).matrix;
  }

  Table tab;
  tab.columns = {"k", "method", "m", "t", "binary_t", "binary_products", "method_products", "savings_pct",
                 "binary_residual", "method_residual", "binary_ms", "method_ms"};
  if (N) tab.columns.insert(tab.columns.end(), {"binary_residual_nonnormal", "method_residual_nonnormal"});

  const auto& rows = table2_rows();
  std::vector<std::vector<json>> out(rows.size());
  parallel_for(rows.size(), o.jobs, [&](std::size_t i) {
    const auto& r = rows[i];
    const int tb = ceil_log2(r.k);
    const auto bin = run_method("binary", A, tb, o.repeat);
    const auto met = run_method(r.method, A, r.t, o.repeat);
    const double savings =
        std::round(100.0 * (1.0 - static_cast<double>(met.products_actual) / bin.products_actual));
    std::vector<json> row{r.k,
                          r.method,
                          met.m,
                          r.t,
                          tb,
                          bin.products_actual,
                          met.products_actual,
                          static_cast<int>(savings),
                          bin.residual_fro,
                          met.residual_fro,
                          bin.elapsed_ms,
                          met.elapsed_ms};
    if (N) {
      row.push_back(run_method("binary", *N, tb).residual_fro);
      row.push_back(run_method(r.method, *N, r.t).residual_fro);
    }
    out[i] = std::move(row);
  });
  for (auto& r : out) tab.add(std::move(r));
  return tab;
}

/// The d = 64 normal matrix with Neumann-argument eigenvalues geometric on
/// [1e-4, 1 - 1e-4], so cond(I - A) = 1e4.
inline SpectrumSpec convergence_spec() {
  SpectrumSpec s;
  s.kind = SpectrumKind::normal_geometric;
  s.dim = 64;
  return s;
}

struct ConvergenceOptions {
  std::vector<std::string> methods = radix_methods();
  int max_products = 60;
  int jobs = 1;
};

/// One row per method step: cumulative products against the measured
/// normalized residual ||I - (I - A) S||_F / sqrt(d) and the state residual
/// (||A^k||_F or ||R_n||_F over sqrt(d)).
inline Table cmd_convergence(const DenseMatrix& A, const ConvergenceOptions& o = {}) {
  Table tab;
  tab.columns = {"method", "m", "step", "k", "products", "residual_normalized", "state_residual"};
  std::vector<std::vector<std::vector<json>>> per(o.methods.size());
  parallel_for(o.methods.size(), o.jobs, [&](std::size_t i) {
    auto run = make_run(o.methods[i], A);
    GemmCounter counter;
    while (true) {
      const auto before = counter.count();
      run.step(counter);
      if (static_cast<long long>(counter.count()) > o.max_products) break;
      const auto& st = run.state();
      per[i].push_back({o.methods[i], st.radix, st.step, st.k(), counter.count(),
                        residual_normalized(A, st.sum), st.companion_normalized()});
      if (counter.count() == before) break;
    }
  });
  for (auto& rows : per)
    for (auto& r : rows) tab.add(std::move(r));
  return tab;
}

struct ThresholdOptions {
  std::vector<std::string> methods = radix_methods();
  double threshold = 1e-13;
  int max_steps = 64;
  int jobs = 1;
};

struct ThresholdOutcome {
  std::string method;
  int m = 0;
  int steps = 0;
  long long products = 0;
  long long products_model = 0;
  double residual_normalized = 0.0;  // measured ||I - (I - A) S||_F / sqrt(d)
  double state_residual = 0.0;       // companion norm / sqrt(d)
  std::string stop;                  // threshold | floor | max-steps
};

/// Steps a method until its state residual q_n (||A^k||_F or ||R_n||_F over
/// sqrt(d)) is at most the threshold, or until a floor shows: once some step
/// has more than halved q, a later step that fails to halve it. (Early steps
/// contract slowly while the eigenvalues near 1 dominate.) Products are
/// counted through the stopping step.
inline ThresholdOutcome run_to_threshold(const std::string& method, const DenseMatrix& A, double threshold,
                                         int max_steps) {
  auto run = make_run(method, A);
  GemmCounter counter;
  ThresholdOutcome out;
  out.method = method;
  double prev = run.state().companion_normalized();
  bool converging = false;
  out.stop = "max-steps";
  for (int n = 1; n <= max_steps; ++n) {
    run.step(counter);
    const double q = run.state().companion_normalized();
    if (q <= threshold) {
      out.stop = "threshold";
      break;
    }
    const bool halved = q <= 0.5 * prev;
    if (converging && !halved) {
      out.stop = "floor";
      break;
    }
    converging = converging || halved;
    prev = q;
  }
  const auto& st = run.state();
  out.m = st.radix;
  out.steps = st.step;
  out.products = static_cast<long long>(counter.count());
  out.products_model = st.ledger.model();
  out.residual_normalized = residual_normalized(A, st.sum);
  out.state_residual = st.companion_normalized();
  return out;
}

inline json reference_threshold_products(const std::string& method) {
  if (method == "binary") return 38;
  if (method == "ternary") return 36;
  if (method == "quinary") return 32;
  if (method == "radix9") return 32;
  if (method == "radix15") return 30;
  return nullptr;
}

inline Table cmd_threshold(const DenseMatrix& A, const ThresholdOptions& o = {}) {
  Table tab;
  tab.columns = {"method", "m",     "steps", "products", "products_model", "reference_products", "residual_normalized",
                 "state_residual", "stop"};
  std::vector<ThresholdOutcome> res(o.methods.size());
  parallel_for(o.methods.size(), o.jobs,
               [&](std::size_t i) { res[i] = run_to_threshold(o.methods[i], A, o.threshold, o.max_steps); });
  for (const auto& r : res) {
    tab.add({r.method, r.m, r.steps, r.products, r.products_model, reference_threshold_products(r.method),
             r.residual_normalized, r.state_residual, r.stop});
  }
  return tab;
}

/// Geometric d = 64 grid on [0.01, 0.99] for the Neumann argument.
inline std::vector<double> tradeoff_grid() { return geometric_grid(0.01, 0.99, 64); }

/// Single kernel application f(B) against (I - B)^{-1}, measured by the
/// scalar oracle on the grid. "vs_exact" divides by the error of the exact
/// prefix S_m of the same radix.
inline Table cmd_tradeoff() {
  const auto grid = tradeoff_grid();
  Table tab;
  tab.columns = {"method", "m", "products", "kernel_residual", "inverse_error", "vs_exact"};
  auto exact_err = [&](int m) { return scalar_oracle_error(FloatPoly::ones(static_cast<std::size_t>(m)), grid); };
  for (int m : {7, 8}) tab.add({"S" + std::to_string(m), m, nullptr, 0.0, exact_err(m), nullptr});
  for (const auto& e : {builtin(15), regenerated_radix15(), builtin(33)}) {
    const auto rep = e.report();
    const double err = scalar_oracle_error(e.float_poly(), grid);
    json prods = e.has_circuit() ? json(e.products()) : json(5);
    tab.add({e.name, e.radix, prods, rep.prefix_error, err, err / exact_err(e.radix)});
  }
  return tab;
}

/// c, leading coefficients of E^[n] for n = 1, 2 against c^((m^n - 1)/(m - 1)),
/// the composition identity defect and the prefix-growth verdict, per kernel.
inline Table cmd_errormap(const std::vector<KernelEntry>& entries, double tolerance = 1e-2) {
  Table tab;
  tab.columns = {"name",          "m",          "prefix_error", "c", "leading_1", "predicted_1", "leading_2",
                 "predicted_2", "composition_defect", "prefix_growth", "status"};
  for (const auto& e : entries) {
    const auto f = e.float_poly();
    const int m = e.radix;
    const double pe = e.report().prefix_error;
    try {
      const auto m2 = static_cast<std::size_t>(m) * static_cast<std::size_t>(m);
      const auto E = error_map(f, m, m2 + 2, tolerance);
      const double c = E.leading();
      const auto e1 = compose_error(E, 1, static_cast<std::size_t>(m) + 2);
      const auto e2 = compose_error(E, 2, m2 + 2);
      tab.add({e.name, m, pe, c, e1[static_cast<std::size_t>(m)], propagation_leading(c, m, 1), e2[m2],
               propagation_leading(c, m, 2), composition_identity_defect(f, m2 + 2), prefix_growth_check(f, m), "ok"});
    } catch (const PrefixConditionError& ex) {
      tab.add({e.name, m, pe, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr,
               std::string("prefix condition violated: ") + ex.what()});
    }
  }
  return tab;
}

}  // namespace neumann::bench
