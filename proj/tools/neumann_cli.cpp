// neumann: command-line harness for the radix-kernel Neumann series library.
//
// Exit codes: 0 success, 1 verification failure, 2 invalid arguments.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "neumann/bench.hpp"
#include "neumann/circuit_io.hpp"
#include "neumann/search.hpp"

namespace {

using namespace neumann;
using bench::Format;

struct Global {
  std::string format = "table";
  std::string out;
  std::uint64_t seed = 1;
  int jobs = 1;
};

void emit(const Global& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw std::runtime_error("cannot open '" + g.out + "' for writing");
  f << text;
}

void emit_table(const Global& g, const bench::Table& t) { emit(g, bench::render(t, bench::parse_format(g.format))); }

struct SpecFlags {
  std::string kind = "normal-geometric";
  int dim = 64;
  double rho = 0.9;
  double alpha = 0.9;
  double lambda_min = 1e-4;
  double lambda_max = 1.0 - 1e-4;
  double kappa = 1e4;
  double nu = 1.0;
  bool complement = false;
  std::string matrix;  // load A from a file instead of generating it
  std::string save;    // write the generated matrix

  void attach(CLI::App* app) {
    app->add_option("--kind", kind, "normal-random | normal-geometric | nonnormal-triangular")
        ->check(CLI::IsMember({"normal-random", "normal-geometric", "nonnormal-triangular"}));
    app->add_option("--dim", dim, "matrix dimension")->check(CLI::PositiveNumber);
    app->add_option("--rho", rho, "nonnormal-triangular: spectral radius");
    app->add_option("--alpha", alpha, "normal-random: eigenvalue scale");
    app->add_option("--lambda-min", lambda_min, "normal-geometric: smallest eigenvalue");
    app->add_option("--lambda-max", lambda_max, "normal-geometric: largest eigenvalue");
    app->add_option("--kappa", kappa, "nonnormal-triangular: ratio of largest to smallest diagonal entry");
    app->add_option("--nu", nu, "nonnormal-triangular: scale of the strictly upper entries");
    app->add_flag("--complement", complement, "normal-geometric: grid describes I - A instead of A");
    app->add_option("--matrix", matrix, "read A from a matrix file (text or binary)");
    app->add_option("--save-matrix", save, "write the generated A in binary format");
  }

  SpectrumSpec spec(std::uint64_t seed) const {
    SpectrumSpec s;
    s.kind = parse_spectrum_kind(kind);
    s.dim = dim;
    s.seed = seed;
    s.rho = rho;
    s.alpha = alpha;
    s.lambda_min = lambda_min;
    s.lambda_max = lambda_max;
    s.complement = complement;
    s.kappa_target = kappa;
    s.nu = nu;
    return s;
  }

  std::pair<DenseMatrix, std::string> matrix_for(std::uint64_t seed) const {
    if (!matrix.empty()) return {load_matrix(matrix), "file " + matrix};
    const auto s = spec(seed);
    auto m = generate(s).matrix;
    if (!save.empty()) save_matrix(save, m, true);
    return {std::move(m), bench::spec_summary(s)};
  }
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncated Neumann series with radix kernels: verification, product counts, residual studies"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--format", g.format, "csv | json | table")->check(CLI::IsMember({"csv", "json", "table"}));
  app.add_option("--out", g.out, "write output to FILE instead of stdout");
  app.add_option("--seed", g.seed, "PRNG seed for generated matrices and searches");
  app.add_option("--jobs", g.jobs, "parallel workers for independent runs")->check(CLI::PositiveNumber);

  int rc = 0;

  auto* verify = app.add_subcommand("verify-kernels", "per-kernel report; exit 1 if an exactness claim fails");
  verify->callback([&] {
    const auto r = bench::cmd_verify();
    emit_table(g, r.table);
    if (!r.ok) rc = 1;
  });

  auto* costs = app.add_subcommand("costs", "update cost C(m) = mu + 2 and products per doubling");
  costs->callback([&] { emit_table(g, bench::cmd_costs()); });

  bench::Table2Options t2;
  auto* table2 = app.add_subcommand("table2", "product counts at pure powers against binary splitting");
  table2->add_option("--dim", t2.dim, "matrix dimension")->check(CLI::PositiveNumber);
  table2->add_option("--alpha", t2.alpha, "eigenvalue scale of the normal-random matrix");
  table2->add_option("--repeat", t2.repeat, "timing repeats (median reported)")->check(CLI::PositiveNumber);
  table2->add_flag("--nonnormal", t2.nonnormal, "also report residuals on a nonnormal-triangular matrix");
  table2->add_option("--nu", t2.nu, "nonnormal strictly-upper scale (default 1/sqrt(dim))");
  table2->callback([&] {
    t2.seed = g.seed;
    t2.jobs = g.jobs;
    emit_table(g, bench::cmd_table2(t2));
  });

  SpecFlags conv_spec;
  bench::ConvergenceOptions conv;
  std::string conv_methods;
  auto* convergence = app.add_subcommand("convergence", "products vs normalized residual per step (CSV for plots)");
  conv_spec.attach(convergence);
  convergence->add_option("--methods", conv_methods, "comma-separated methods");
  convergence->add_option("--max-products", conv.max_products, "stop each method past this many products");
  convergence->callback([&] {
    if (!conv_methods.empty()) conv.methods = split_csv(conv_methods);
    conv.jobs = g.jobs;
    emit_table(g, bench::cmd_convergence(conv_spec.matrix_for(g.seed).first, conv));
  });

  SpecFlags thr_spec;
  bench::ThresholdOptions thr;
  std::string thr_methods;
  auto* threshold = app.add_subcommand("threshold", "products to reach a normalized residual threshold");
  thr_spec.attach(threshold);
  threshold->add_option("--threshold", thr.threshold, "target normalized residual");
  threshold->add_option("--methods", thr_methods, "comma-separated methods");
  threshold->add_option("--max-steps", thr.max_steps, "step cap per method");
  threshold->callback([&] {
    if (!thr_methods.empty()) thr.methods = split_csv(thr_methods);
    thr.jobs = g.jobs;
    emit_table(g, bench::cmd_threshold(thr_spec.matrix_for(g.seed).first, thr));
  });

  auto* tradeoff = app.add_subcommand("tradeoff", "single-application inverse error vs radix");
  tradeoff->callback([&] { emit_table(g, bench::cmd_tradeoff()); });

  SpecFlags eval_spec;
  std::string method = "radix9";
  int t = 2;
  int naive_k = 0;
  int repeat = 1;
  auto* eval = app.add_subcommand("eval", "evaluate S_k(A) with one method and print a JSON run record");
  eval_spec.attach(eval);
  eval->add_option("--method", method, "evaluation method")->check(CLI::IsMember(bench::method_names()));
  eval->add_option("--t", t, "radix steps (k = m^t)")->check(CLI::PositiveNumber);
  eval->add_option("--k", naive_k, "naive: series length (default 2^t)");
  eval->add_option("--repeat", repeat, "timing repeats (median reported)")->check(CLI::PositiveNumber);
  eval->callback([&] {
    const auto [A, summary] = eval_spec.matrix_for(g.seed);
    const int k = naive_k > 0 ? naive_k : (1 << std::min(t, 30));
    auto rec = bench::run_method(method, A, t, repeat, k);
    rec.spec = summary;
    rec.seed = g.seed;
    if (g.format == "json" || g.format == "table") {
      emit(g, bench::to_json(rec).dump(2) + "\n");
    } else {
      bench::Table tab;
      const auto j = bench::to_json(rec);
      std::vector<bench::json> row;
      for (const auto& [key, v] : j.items()) {
        tab.columns.push_back(key);
        row.push_back(v);
      }
      tab.add(std::move(row));
      emit_table(g, tab);
    }
  });

  SearchConfig sc;
  std::string report_out;
  auto* search = app.add_subcommand("search", "multistart search for an approximate kernel circuit");
  search->add_option("--radix", sc.radix, "kernel radix m")->check(CLI::Range(2, 1 << 20));
  search->add_option("--products", sc.products, "product count p")->check(CLI::Range(1, 12));
  search->add_option("--starts", sc.starts, "random starts")->check(CLI::PositiveNumber);
  search->add_option("--max-iter", sc.max_iterations, "L-BFGS iterations per start");
  search->add_option("--report", report_out, "also write a JSON summary with per-start objectives");
  search->callback([&] {
    sc.seed = g.seed;
    sc.jobs = g.jobs;
    const auto r = multistart_search(sc);
    emit(g, to_json(r.best).dump(2) + "\n");
    nlohmann::json summary{{"radix", sc.radix},
                           {"products", sc.products},
                           {"starts", sc.starts},
                           {"seed", sc.seed},
                           {"best_objective", r.best_objective},
                           {"best_start", r.best_start},
                           {"report", to_json(r.report)},
                           {"objectives", r.objectives}};
    if (!report_out.empty()) {
      std::ofstream f(report_out);
      f << summary.dump(2) << '\n';
    }
    std::fprintf(stderr, "best objective %.3e (start %zu), c = %.6f, prefix error %.3e\n", r.best_objective,
                 r.best_start, r.report.c, r.report.prefix_error);
  });

  std::vector<std::string> em_kernels;
  std::string em_circuit;
  double em_tol = 1e-2;
  auto* errormap = app.add_subcommand("errormap", "error-map leading coefficients and composition checks");
  errormap->add_option("--kernel", em_kernels, "registry kernel names (default: all)");
  errormap->add_option("--circuit", em_circuit, "kernel circuit JSON file");
  errormap->add_option("--tolerance", em_tol, "prefix-condition tolerance");
  errormap->callback([&] {
    std::vector<KernelEntry> entries;
    if (!em_circuit.empty()) {
      std::ifstream f(em_circuit);
      if (!f) throw CLI::ValidationError("--circuit", "cannot open " + em_circuit);
      KernelEntry e;
      e.name = em_circuit;
      e.circuit = circuit_from_json(nlohmann::json::parse(f));
      e.radix = std::visit([](const auto& k) { return k.radix(); }, *e.circuit);
      entries.push_back(std::move(e));
    }
    for (const auto& n : em_kernels) entries.push_back(kernel_by_name(n));
    if (entries.empty()) entries = registry();
    if (app.get_option("--format")->count() == 0) g.format = "csv";
    emit_table(g, bench::cmd_errormap(entries, em_tol));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const neumann::UnsupportedRadixError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return rc;
}
