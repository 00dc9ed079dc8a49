#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "neumann/circuit.hpp"
#include "neumann/errors.hpp"

namespace neumann {

/// Parameterization of a p-product radix-m kernel circuit:
///
///   P_1 = B * B                                  (fixed)
///   P_i = L_i * R_i,  L_i, R_i over {I, B, P_1..P_{i-1}},  i = 2..p
///   f   = I + g_1 B + g_2 P_1 + ... + g_p P_{p-1} + P_p
///
/// Parameters are laid out step by step (left weights, then right weights,
/// each in basis order I, B, P_1, ...), followed by g_1..g_p.
struct AnsatzLayout {
  int radix = 15;
  int products = 4;

  std::size_t basis_size(int step) const { return static_cast<std::size_t>(step) + 1; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (int i = 2; i <= products; ++i) n += 2 * basis_size(i);
    return n + static_cast<std::size_t>(products);
  }

  void validate() const {
    if (radix < 2) throw std::invalid_argument("AnsatzLayout: radix must be >= 2");
    if (products < 1) throw std::invalid_argument("AnsatzLayout: at least one product is required");
  }
};

inline FloatCircuit unpack(std::span<const double> params, const AnsatzLayout& layout) {
  layout.validate();
  if (params.size() != layout.parameter_count()) {
    throw std::invalid_argument("unpack: expected " + std::to_string(layout.parameter_count()) +
                                " parameters, got " + std::to_string(params.size()));
  }
  std::vector<ProductStep<double>> steps;
  steps.push_back({LinComb<double>{{basis_generator, 1.0}}, LinComb<double>{{basis_generator, 1.0}}});
  std::size_t k = 0;
  for (int i = 2; i <= layout.products; ++i) {
    ProductStep<double> s;
    for (std::size_t x = 0; x < layout.basis_size(i); ++x) s.left.add(x, params[k++]);
    for (std::size_t x = 0; x < layout.basis_size(i); ++x) s.right.add(x, params[k++]);
    steps.push_back(std::move(s));
  }
  LinComb<double> fin{{basis_identity, 1.0}};
  for (int j = 1; j <= layout.products; ++j) fin.add(static_cast<BasisIndex>(j), params[k++]);
  fin.add(basis_product(static_cast<std::size_t>(layout.products)), 1.0);
  return FloatCircuit(layout.radix, std::move(steps), std::move(fin));
}

/// Inverse of unpack for circuits that follow the ansatz.
inline std::vector<double> pack(const FloatCircuit& k, const AnsatzLayout& layout) {
  layout.validate();
  if (k.radix() != layout.radix || k.products() != layout.products) {
    throw CircuitError("pack: circuit radix/product count does not match the layout");
  }
  const auto& s1 = k.steps().front();
  const LinComb<double> b{{basis_generator, 1.0}};
  if (!(s1.left == b) || !(s1.right == b)) throw CircuitError("pack: first product must be B * B");
  const auto& fin = k.final_combination();
  const auto last = basis_product(static_cast<std::size_t>(layout.products));
  if (fin.weight(basis_identity) != 1.0 || fin.weight(last) != 1.0) {
    throw CircuitError("pack: final combination must have unit I and P_p weights");
  }
  std::vector<double> out;
  out.reserve(layout.parameter_count());
  for (int i = 2; i <= layout.products; ++i) {
    const auto& s = k.steps()[static_cast<std::size_t>(i - 1)];
    for (std::size_t x = 0; x < layout.basis_size(i); ++x) out.push_back(s.left.weight(x));
    for (std::size_t x = 0; x < layout.basis_size(i); ++x) out.push_back(s.right.weight(x));
  }
  for (int j = 1; j <= layout.products; ++j) out.push_back(fin.weight(static_cast<BasisIndex>(j)));
  return out;
}

namespace detail {

// Polynomials truncated to degree < m; only those coefficients enter the
// objective, so the whole forward and reverse pass runs at that length.
using Coeffs = std::vector<double>;

inline void axpy(double a, const Coeffs& x, Coeffs& y) {
  for (std::size_t j = 0; j < y.size(); ++j) y[j] += a * x[j];
}

inline double dot(const Coeffs& a, const Coeffs& b) {
  double s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

inline Coeffs mul_trunc(const Coeffs& a, const Coeffs& b) {
  const std::size_t n = a.size();
  Coeffs out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; i + j < n; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

// adjA[i] = sum_j adjP[i + j] * b[j]  (adjoint of P = A * B with respect to A)
inline Coeffs mul_adjoint(const Coeffs& adjP, const Coeffs& b) {
  const std::size_t n = adjP.size();
  Coeffs out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; i + j < n; ++j) s += adjP[i + j] * b[j];
    out[i] = s;
  }
  return out;
}

struct Tape {
  std::vector<Coeffs> basis;  // I, B, P_1, ..., P_p truncated to degree < m
  std::vector<Coeffs> left, right;
  Coeffs f;
};

inline Tape forward(std::span<const double> x, const AnsatzLayout& L) {
  const std::size_t n = static_cast<std::size_t>(L.radix);
  Tape t;
  auto mono = [n](std::size_t deg) {
    Coeffs c(n, 0.0);
    if (deg < n) c[deg] = 1.0;
    return c;
  };
  t.basis = {mono(0), mono(1), mono(2)};
  std::size_t k = 0;
  for (int i = 2; i <= L.products; ++i) {
    Coeffs l(n, 0.0), r(n, 0.0);
    for (std::size_t X = 0; X < L.basis_size(i); ++X) axpy(x[k++], t.basis[X], l);
    for (std::size_t X = 0; X < L.basis_size(i); ++X) axpy(x[k++], t.basis[X], r);
    t.basis.push_back(mul_trunc(l, r));
    t.left.push_back(std::move(l));
    t.right.push_back(std::move(r));
  }
  t.f = t.basis[0];
  for (int j = 1; j <= L.products; ++j) axpy(x[k++], t.basis[static_cast<std::size_t>(j)], t.f);
  axpy(1.0, t.basis.back(), t.f);
  return t;
}

inline double objective_from(const Tape& t) {
  double s = 0;
  for (double c : t.f) s += (c - 1.0) * (c - 1.0);
  return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// sum_{j < m} ([f]_j - 1)^2 for the unpacked circuit; +inf if not finite.
inline double objective(std::span<const double> params, const AnsatzLayout& layout) {
  layout.validate();
  if (params.size() != layout.parameter_count()) throw std::invalid_argument("objective: parameter count mismatch");
  return detail::objective_from(detail::forward(params, layout));
}

/// Objective and its exact gradient (reverse pass through the convolutions).
inline double objective_and_gradient(std::span<const double> x, const AnsatzLayout& L, std::span<double> grad) {
  using namespace detail;
  L.validate();
  if (x.size() != L.parameter_count() || grad.size() != x.size()) {
    throw std::invalid_argument("objective_and_gradient: parameter count mismatch");
  }
  const Tape t = forward(x, L);
  const double value = objective_from(t);
  const std::size_t n = static_cast<std::size_t>(L.radix);
  const std::size_t p = static_cast<std::size_t>(L.products);

  Coeffs adj_f(n);
  for (std::size_t j = 0; j < n; ++j) adj_f[j] = 2.0 * (t.f[j] - 1.0);

  std::vector<Coeffs> adj(t.basis.size(), Coeffs(n, 0.0));
  const std::size_t gamma0 = L.parameter_count() - p;
  for (std::size_t j = 1; j <= p; ++j) {
    grad[gamma0 + j - 1] = dot(adj_f, t.basis[j]);
    axpy(x[gamma0 + j - 1], adj_f, adj[j]);
  }
  axpy(1.0, adj_f, adj[p + 1]);

  // parameter offset of step i's left weights
  std::vector<std::size_t> offset(p + 1, 0);
  for (int i = 3; i <= L.products; ++i) {
    offset[static_cast<std::size_t>(i)] = offset[static_cast<std::size_t>(i - 1)] + 2 * L.basis_size(i - 1);
  }
  for (int i = L.products; i >= 2; --i) {
    const auto si = static_cast<std::size_t>(i);
    const Coeffs& adjP = adj[si + 1];
    const Coeffs& l = t.left[si - 2];
    const Coeffs& r = t.right[si - 2];
    const Coeffs adjL = mul_adjoint(adjP, r);
    const Coeffs adjR = mul_adjoint(adjP, l);
    const std::size_t nb = L.basis_size(i);
    for (std::size_t X = 0; X < nb; ++X) {
      grad[offset[si] + X] = dot(adjL, t.basis[X]);
      grad[offset[si] + nb + X] = dot(adjR, t.basis[X]);
      axpy(x[offset[si] + X], adjL, adj[X]);
      axpy(x[offset[si] + nb + X], adjR, adj[X]);
    }
  }
  return value;
}

inline std::vector<double> gradient(std::span<const double> params, const AnsatzLayout& layout) {
  std::vector<double> g(params.size());
  objective_and_gradient(params, layout, g);
  return g;
}

// ---------------------------------------------------------------------------
// L-BFGS with a strong-Wolfe line search

struct LbfgsOptions {
  int history = 10;
  double gradient_tolerance = 1e-12;
  int max_iterations = 2000;
};

struct LocalResult {
  std::vector<double> x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
};

/// fg(x, grad) returns f(x) and writes the gradient.
using ObjectiveFn = std::function<double(std::span<const double>, std::span<double>)>;

namespace detail {

inline double norm2(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

struct LinePoint {
  double alpha, value, slope;
  std::vector<double> x, g;
};

inline LinePoint line_eval(const ObjectiveFn& fg, const std::vector<double>& x0, const std::vector<double>& dir,
                           double alpha) {
  LinePoint p{alpha, 0, 0, x0, std::vector<double>(x0.size())};
  for (std::size_t i = 0; i < x0.size(); ++i) p.x[i] += alpha * dir[i];
  p.value = fg(p.x, p.g);
  p.slope = std::isfinite(p.value) ? dot(p.g, dir) : std::numeric_limits<double>::infinity();
  return p;
}

// Nocedal & Wright, algorithms 3.5 / 3.6, with bisection-safeguarded cubic
// interpolation in the zoom phase.
inline std::optional<LinePoint> strong_wolfe(const ObjectiveFn& fg, const std::vector<double>& x0, double f0,
                                             double d0, const std::vector<double>& dir, double alpha1) {
  constexpr double c1 = 1e-4, c2 = 0.9;
  auto zoom = [&](LinePoint lo, LinePoint hi) -> std::optional<LinePoint> {
    for (int it = 0; it < 40; ++it) {
      double a;
      // cubic interpolation through (lo, hi); fall back to bisection
      const double d1 = lo.slope + hi.slope - 3 * (lo.value - hi.value) / (lo.alpha - hi.alpha);
      const double disc = d1 * d1 - lo.slope * hi.slope;
      if (disc >= 0 && std::isfinite(hi.value)) {
        const double d2 = std::copysign(std::sqrt(disc), hi.alpha - lo.alpha);
        a = hi.alpha - (hi.alpha - lo.alpha) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2 * d2);
      } else {
        a = 0.5 * (lo.alpha + hi.alpha);
      }
      const double lo_a = std::min(lo.alpha, hi.alpha), hi_a = std::max(lo.alpha, hi.alpha);
      const double margin = 0.1 * (hi_a - lo_a);
      if (!std::isfinite(a) || a < lo_a + margin || a > hi_a - margin) a = 0.5 * (lo.alpha + hi.alpha);
      if (hi_a - lo_a < 1e-20 * std::max(1.0, hi_a)) break;
      auto p = line_eval(fg, x0, dir, a);
      if (p.value > f0 + c1 * a * d0 || p.value >= lo.value) {
        hi = std::move(p);
      } else {
        if (std::abs(p.slope) <= -c2 * d0) return p;
        if (p.slope * (hi.alpha - lo.alpha) >= 0) hi = lo;
        lo = std::move(p);
      }
    }
    if (lo.alpha > 0 && lo.value < f0) return lo;
    return std::nullopt;
  };

  LinePoint prev{0.0, f0, d0, x0, {}};
  double alpha = alpha1;
  for (int i = 0; i < 30; ++i) {
    auto p = line_eval(fg, x0, dir, alpha);
    if (p.value > f0 + c1 * alpha * d0 || (i > 0 && p.value >= prev.value)) return zoom(prev, p);
    if (std::abs(p.slope) <= -c2 * d0) return p;
    if (p.slope >= 0) return zoom(p, prev);
    prev = std::move(p);
    alpha *= 2.0;
  }
  return prev.alpha > 0 ? std::optional<LinePoint>(prev) : std::nullopt;
}

}  // namespace detail

inline LocalResult minimize_lbfgs(const ObjectiveFn& fg, std::vector<double> x, const LbfgsOptions& opt = {}) {
  using namespace detail;
  const std::size_t n = x.size();
  std::vector<double> g(n);
  double f = fg(x, g);
  std::deque<std::vector<double>> S, Y;
  std::deque<double> rho;
  LocalResult res;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (!std::isfinite(f) || norm2(g) <= opt.gradient_tolerance) break;
    // two-loop recursion
    std::vector<double> q = g;
    std::vector<double> a(S.size());
    for (std::size_t i = S.size(); i-- > 0;) {
      a[i] = rho[i] * dot(S[i], q);
      for (std::size_t j = 0; j < n; ++j) q[j] -= a[i] * Y[i][j];
    }
    double gamma = 1.0;
    if (!S.empty()) gamma = dot(S.back(), Y.back()) / dot(Y.back(), Y.back());
    for (auto& v : q) v *= gamma;
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double b = rho[i] * dot(Y[i], q);
      for (std::size_t j = 0; j < n; ++j) q[j] += S[i][j] * (a[i] - b);
    }
    std::vector<double> dir(n);
    for (std::size_t j = 0; j < n; ++j) dir[j] = -q[j];
    double d0 = dot(g, dir);
    if (!(d0 < 0)) {  // not a descent direction: restart from steepest descent
      S.clear(), Y.clear(), rho.clear();
      for (std::size_t j = 0; j < n; ++j) dir[j] = -g[j];
      d0 = dot(g, dir);
    }
    const double alpha1 = S.empty() ? std::min(1.0, 1.0 / norm2(g)) : 1.0;
    auto p = strong_wolfe(fg, x, f, d0, dir, alpha1);
    if (!p) break;
    std::vector<double> s(n), y(n);
    for (std::size_t j = 0; j < n; ++j) {
      s[j] = p->x[j] - x[j];
      y[j] = p->g[j] - g[j];
    }
    const double sy = dot(s, y);
    x = std::move(p->x);
    g = std::move(p->g);
    const double f_old = f;
    f = p->value;
    if (sy > 1e-300) {
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > opt.history) S.pop_front(), Y.pop_front(), rho.pop_front();
    }
    if (f == 0.0 || f_old == f) {
      ++it;
      break;
    }
  }
  res.x = std::move(x);
  res.value = f;
  res.gradient_norm = norm2(g);
  res.iterations = it;
  return res;
}

// ---------------------------------------------------------------------------
// Multistart search

struct SearchConfig {
  int radix = 15;
  int products = 4;
  int starts = 200;
  std::uint64_t seed = 1;
  double init_scale = 1.5;  // start coordinates uniform on [-init_scale, init_scale]
  double gradient_tolerance = 1e-12;
  int max_iterations = 2000;
  int jobs = 1;
};

struct SearchResult {
  FloatCircuit best;
  std::vector<double> best_params;
  double best_objective = std::numeric_limits<double>::infinity();
  std::size_t best_start = 0;
  std::vector<double> objectives;  // per start, in start order
  KernelReport report;
};

/// Start s draws its initial point from mt19937_64 seeded with (seed, s), so
/// results do not depend on the number of jobs.
inline std::vector<double> start_point(const SearchConfig& cfg, std::size_t start, std::size_t n) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32U),
                    static_cast<std::uint32_t>(start)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unif(-cfg.init_scale, cfg.init_scale);
  std::vector<double> x(n);
  for (auto& v : x) v = unif(rng);
  return x;
}

inline SearchResult multistart_search(const SearchConfig& cfg) {
  if (cfg.starts < 1) throw std::invalid_argument("multistart_search: starts must be >= 1");
  const AnsatzLayout layout{cfg.radix, cfg.products};
  layout.validate();
  const std::size_t n = layout.parameter_count();
  const ObjectiveFn fg = [&layout](std::span<const double> x, std::span<double> g) {
    return objective_and_gradient(x, layout, g);
  };
  const LbfgsOptions opt{10, cfg.gradient_tolerance, cfg.max_iterations};

  const auto starts = static_cast<std::size_t>(cfg.starts);
  std::vector<LocalResult> local(starts);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t s = first; s < starts; s += stride) local[s] = minimize_lbfgs(fg, start_point(cfg, s, n), opt);
  };
  const auto jobs = static_cast<std::size_t>(std::max(1, cfg.jobs));
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(work, j, jobs);
  }

  SearchResult out{unpack(local[0].x, layout), {}, std::numeric_limits<double>::infinity(), 0, {}, {}};
  out.objectives.reserve(starts);
  for (std::size_t s = 0; s < starts; ++s) {
    const double v = std::isfinite(local[s].value) ? local[s].value : std::numeric_limits<double>::infinity();
    out.objectives.push_back(v);
    if (v < out.best_objective) {
      out.best_objective = v;
      out.best_start = s;
    }
  }
  out.best_params = local[out.best_start].x;
  out.best = unpack(out.best_params, layout);
  out.report = kernel_report(out.best);
  return out;
}

}  // namespace neumann
