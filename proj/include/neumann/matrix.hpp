#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "neumann/errors.hpp"
#include "neumann/poly.hpp"

namespace neumann {

using EigenMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class GemmCounter;

/// Square row-major binary64 matrix. Additions and scalings are free; only
/// gemm() is a counted product.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  explicit DenseMatrix(EigenMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw DimensionError("DenseMatrix must be square");
    if (!m_.allFinite()) throw std::invalid_argument("DenseMatrix entries must be finite");
  }

  static DenseMatrix identity(int d) { return DenseMatrix(EigenMatrix::Identity(d, d)); }
  static DenseMatrix zeros(int d) { return DenseMatrix(EigenMatrix::Zero(d, d)); }

  /// Row-major values, d*d of them.
  static DenseMatrix from_values(int d, std::span<const double> values) {
    if (values.size() != static_cast<std::size_t>(d) * static_cast<std::size_t>(d)) {
      throw DimensionError("expected " + std::to_string(d * d) + " values");
    }
    EigenMatrix m(d, d);
    std::copy(values.begin(), values.end(), m.data());
    return DenseMatrix(std::move(m));
  }

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  std::span<const double> values() const noexcept { return {m_.data(), static_cast<std::size_t>(m_.size())}; }
  const EigenMatrix& eigen() const noexcept { return m_; }

  double frobenius_norm() const { return m_.norm(); }

  DenseMatrix& operator+=(const DenseMatrix& o) {
    check_same(o);
    m_ += o.m_;
    return *this;
  }
  DenseMatrix& operator-=(const DenseMatrix& o) {
    check_same(o);
    m_ -= o.m_;
    return *this;
  }
  DenseMatrix& operator*=(double s) {
    m_ *= s;
    return *this;
  }
  DenseMatrix& add_scaled(double s, const DenseMatrix& o) {
    check_same(o);
    m_ += s * o.m_;
    return *this;
  }
  DenseMatrix& add_identity(double s) {
    m_.diagonal().array() += s;
    return *this;
  }

  friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
  friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
  friend DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }
  friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 private:
  friend DenseMatrix gemm(const DenseMatrix&, const DenseMatrix&, GemmCounter&);
  struct unchecked_t {};
  DenseMatrix(EigenMatrix m, unchecked_t) : m_(std::move(m)) {}

  void check_same(const DenseMatrix& o) const {
    if (o.dim() != dim()) throw DimensionError("matrix dimension mismatch");
  }

  EigenMatrix m_;
};

/// Number of d x d by d x d products performed. Only gemm() advances it.
class GemmCounter {
 public:
  std::uint64_t count() const noexcept { return count_; }

 private:
  friend DenseMatrix gemm(const DenseMatrix&, const DenseMatrix&, GemmCounter&);
  std::uint64_t count_ = 0;
};

inline DenseMatrix gemm(const DenseMatrix& a, const DenseMatrix& b, GemmCounter& counter) {
  if (a.dim() != b.dim()) throw DimensionError("gemm: dimension mismatch");
  EigenMatrix c(a.dim(), a.dim());
  c.noalias() = a.m_ * b.m_;
  ++counter.count_;
  return DenseMatrix(std::move(c), DenseMatrix::unchecked_t{});
}

/// ||I - (I - A) S||_F. The product here is a measurement and charges no
/// counter.
inline double residual_fro(const DenseMatrix& A, const DenseMatrix& S) {
  if (A.dim() != S.dim()) throw DimensionError("residual_fro: dimension mismatch");
  const int d = A.dim();
  EigenMatrix M = -A.eigen();
  M.diagonal().array() += 1.0;
  EigenMatrix R(d, d);
  R.noalias() = -(M * S.eigen());
  R.diagonal().array() += 1.0;
  return R.norm();
}

/// residual_fro / sqrt(d).
inline double residual_normalized(const DenseMatrix& A, const DenseMatrix& S) {
  return residual_fro(A, S) / std::sqrt(static_cast<double>(A.dim()));
}

/// max_i |p(l_i) - 1/(1 - l_i)| / max_i |1/(1 - l_i)|: the relative
/// spectral-norm error of p(B) against (I - B)^{-1} for a normal B with
/// eigenvalues l_i.
inline double scalar_oracle_error(const FloatPoly& p, std::span<const double> eigenvalues) {
  if (eigenvalues.empty()) throw std::invalid_argument("scalar_oracle_error: no eigenvalues");
  double num = 0.0;
  double den = 0.0;
  const auto c = p.coeffs();
  for (double l : eigenvalues) {
    if (!(std::abs(l) < 1.0)) throw std::domain_error("scalar_oracle_error: eigenvalue outside (-1, 1)");
    double v = 0.0;
    for (std::size_t j = c.size(); j-- > 0;) v = v * l + c[j];
    const double inv = 1.0 / (1.0 - l);
    num = std::max(num, std::abs(v - inv));
    den = std::max(den, std::abs(inv));
  }
  return num / den;
}

// ---------------------------------------------------------------------------
// Test-matrix generators

enum class SpectrumKind { normal_random, normal_geometric, nonnormal_triangular };

inline std::string to_string(SpectrumKind k) {
  switch (k) {
    case SpectrumKind::normal_random: return "normal-random";
    case SpectrumKind::normal_geometric: return "normal-geometric";
    case SpectrumKind::nonnormal_triangular: return "nonnormal-triangular";
  }
  return "?";
}

inline SpectrumKind parse_spectrum_kind(const std::string& s) {
  if (s == "normal-random") return SpectrumKind::normal_random;
  if (s == "normal-geometric") return SpectrumKind::normal_geometric;
  if (s == "nonnormal-triangular") return SpectrumKind::nonnormal_triangular;
  throw std::invalid_argument("unknown spectrum kind '" + s + "'");
}

struct SpectrumSpec {
  SpectrumKind kind = SpectrumKind::normal_geometric;
  int dim = 64;
  std::uint64_t seed = 1;
  // normal-random: eigenvalues alpha * U[-1, 1]
  double alpha = 0.9;
  // normal-geometric: Neumann-argument eigenvalues on a geometric grid over
  // [lambda_min, lambda_max]; with `complement` the grid describes I - A
  // instead, i.e. eigenvalues are 1 - grid.
  double lambda_min = 1e-4;
  double lambda_max = 1.0 - 1e-4;
  bool complement = false;
  // nonnormal-triangular: diagonal geometric on [rho / kappa_target, rho],
  // strictly upper part N(0, 1) * nu.
  double rho = 0.9;
  double kappa_target = 1e4;
  double nu = 1.0;
};

struct GeneratedMatrix {
  DenseMatrix matrix;
  std::vector<double> eigenvalues;
  std::optional<DenseMatrix> basis;  // orthogonal Omega for the normal kinds
  std::optional<double> kappa;       // cond(I - A) from the known spectrum, normal kinds only
};

/// d points geometrically spaced on [lo, hi], ascending; endpoints exact.
inline std::vector<double> geometric_grid(double lo, double hi, int d) {
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("geometric_grid: need 0 < lo <= hi");
  std::vector<double> g(static_cast<std::size_t>(d));
  if (d == 1) {
    g[0] = hi;
    return g;
  }
  const double ratio = std::log(hi / lo);
  for (int i = 0; i < d; ++i) g[static_cast<std::size_t>(i)] = lo * std::exp(ratio * i / (d - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

/// Haar-like orthogonal matrix: Q of a seeded standard-normal matrix with the
/// signs of R's diagonal made positive.
inline DenseMatrix random_orthogonal(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  }
  return DenseMatrix(EigenMatrix(Q));
}

inline GeneratedMatrix generate(const SpectrumSpec& spec) {
  const int d = spec.dim;
  if (d < 1) throw std::invalid_argument("generate: dimension must be >= 1");
  std::mt19937_64 rng(spec.seed);
  GeneratedMatrix out;

  auto build_normal = [&](std::vector<double> eig) {
    const auto Q = random_orthogonal(d, rng);
    const Eigen::VectorXd l = Eigen::Map<const Eigen::VectorXd>(eig.data(), d);
    EigenMatrix A = Q.eigen() * l.asDiagonal() * Q.eigen().transpose();
    A = 0.5 * (A + A.transpose()).eval();
    double smax = 0.0;
    double smin = std::numeric_limits<double>::infinity();
    for (double x : eig) {
      smax = std::max(smax, std::abs(1.0 - x));
      smin = std::min(smin, std::abs(1.0 - x));
    }
    out.matrix = DenseMatrix(std::move(A));
    out.basis = Q;
    out.kappa = smax / smin;
    out.eigenvalues = std::move(eig);
  };

  switch (spec.kind) {
    case SpectrumKind::normal_random: {
      if (!(std::abs(spec.alpha) < 1.0)) throw std::domain_error("generate: spectral radius >= 1 requested");
      std::uniform_real_distribution<double> unif(-1.0, 1.0);
      std::vector<double> eig(static_cast<std::size_t>(d));
      for (auto& x : eig) x = spec.alpha * unif(rng);
      build_normal(std::move(eig));
      break;
    }
    case SpectrumKind::normal_geometric: {
      auto eig = geometric_grid(spec.lambda_min, spec.lambda_max, d);
      if (spec.complement) {
        for (auto& x : eig) x = 1.0 - x;
        std::reverse(eig.begin(), eig.end());
      }
      for (double x : eig) {
        if (!(std::abs(x) < 1.0)) throw std::domain_error("generate: spectral radius >= 1 requested");
      }
      build_normal(std::move(eig));
      break;
    }
    case SpectrumKind::nonnormal_triangular: {
      if (!(std::abs(spec.rho) < 1.0) || spec.rho <= 0.0) {
        throw std::domain_error("generate: spectral radius must lie in (0, 1)");
      }
      auto diag = geometric_grid(spec.rho / spec.kappa_target, spec.rho, d);
      std::normal_distribution<double> normal(0.0, 1.0);
      EigenMatrix A = EigenMatrix::Zero(d, d);
      for (int i = 0; i < d; ++i) {
        A(i, i) = diag[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < d; ++j) A(i, j) = normal(rng) * spec.nu;
      }
      out.matrix = DenseMatrix(std::move(A));
      out.eigenvalues = std::move(diag);
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matrix files. Text: "d" followed by d*d row-major values. Binary: the
// 8-byte magic "NEUMATv1", a little-endian uint64 d, then d*d binary64.

inline constexpr char matrix_magic[8] = {'N', 'E', 'U', 'M', 'A', 'T', 'v', '1'};

inline void write_matrix_text(std::ostream& os, const DenseMatrix& m) {
  os << m.dim() << '\n';
  os.precision(17);
  for (int i = 0; i < m.dim(); ++i) {
    for (int j = 0; j < m.dim(); ++j) os << (j ? " " : "") << m(i, j);
    os << '\n';
  }
}

inline void write_matrix_binary(std::ostream& os, const DenseMatrix& m) {
  os.write(matrix_magic, sizeof matrix_magic);
  const std::uint64_t d = static_cast<std::uint64_t>(m.dim());
  os.write(reinterpret_cast<const char*>(&d), sizeof d);
  const auto v = m.values();
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

/// Reads either format, detected from the leading magic.
inline DenseMatrix read_matrix(std::istream& is) {
  char head[sizeof matrix_magic] = {};
  is.read(head, sizeof head);
  if (is.gcount() == sizeof head && std::memcmp(head, matrix_magic, sizeof head) == 0) {
    std::uint64_t d = 0;
    is.read(reinterpret_cast<char*>(&d), sizeof d);
    std::vector<double> v(static_cast<std::size_t>(d * d));
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!is) throw std::runtime_error("read_matrix: truncated binary matrix");
    return DenseMatrix::from_values(static_cast<int>(d), v);
  }
  is.clear();
  is.seekg(0);
  long d = 0;
  if (!(is >> d) || d < 1) throw std::runtime_error("read_matrix: bad header");
  std::vector<double> v(static_cast<std::size_t>(d * d));
  for (auto& x : v) {
    if (!(is >> x)) throw std::runtime_error("read_matrix: truncated text matrix");
  }
  return DenseMatrix::from_values(static_cast<int>(d), v);
}

inline void save_matrix(const std::string& path, const DenseMatrix& m, bool binary) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  binary ? write_matrix_binary(os, m) : write_matrix_text(os, m);
}

inline DenseMatrix load_matrix(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_matrix(is);
}

}  // namespace neumann
