#include "sadmm/constraint.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sadmm {

namespace {

constexpr double kZeroEigRelTol = 1e-9;

void finalize(ConstraintSystem& C) {
  C.sigma_A = smallest_positive_eigenvalue(C.A);
  C.range_feasible =
      (C.B_diag.array() == -1.0).all() && (C.b.size() == 0 || (C.b.array() == 0.0).all());
  // Columns of A that touch nothing leave sigma_A resting on the positive
  // spectrum only; record them so callers can see the rank deficiency.
  for (int j = 0; j < C.A.cols(); ++j) {
    if (C.A.col(j).isZero(0.0)) {
      C.warnings.push_back("zero column " + std::to_string(j) +
                           " in A; smallest positive eigenvalue used for sigma_A");
    }
  }
}

ConstraintSystem with_minus_identity_B(Eigen::MatrixXd A) {
  ConstraintSystem C;
  const int m = static_cast<int>(A.rows());
  C.A = std::move(A);
  C.B_diag = Eigen::VectorXd::Constant(m, -1.0);
  C.b = Eigen::VectorXd::Zero(m);
  finalize(C);
  return C;
}

}  // namespace

ConstraintSystem make_identity_constraint(int n) {
  if (n < 1) throw std::invalid_argument("identity constraint needs n >= 1");
  return with_minus_identity_B(Eigen::MatrixXd::Identity(n, n));
}

ConstraintSystem make_chain_difference_constraint(int n) {
  if (n < 2) throw std::invalid_argument("chain difference constraint needs n >= 2");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n - 1, n);
  for (int i = 0; i < n - 1; ++i) {
    A(i, i) = 1.0;
    A(i, i + 1) = -1.0;
  }
  return with_minus_identity_B(std::move(A));
}

ConstraintSystem make_edge_list_constraint(const std::string& path, int n_vertices) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open edge list file: " + path);
  std::vector<std::pair<int, int>> edges;
  int max_id = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;  // blank line
    std::istringstream ls(line);
    int i, j;
    if (!(ls >> i >> j))
      throw std::runtime_error("edge list parse error at line " + std::to_string(line_no) +
                               ": expected two vertex ids");
    if (i < 0 || j < 0)
      throw std::runtime_error("edge list parse error at line " + std::to_string(line_no) +
                               ": vertex ids are 0-based nonnegative");
    edges.emplace_back(i, j);
    max_id = std::max(max_id, std::max(i, j));
  }
  if (edges.empty()) throw std::runtime_error("edge list file has no edges: " + path);
  int n = n_vertices >= 0 ? n_vertices : max_id + 1;
  if (max_id >= n)
    throw std::runtime_error("edge list vertex id exceeds declared vertex count in " + path);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<int>(edges.size()), n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    A(static_cast<int>(e), edges[e].first) = 1.0;
    A(static_cast<int>(e), edges[e].second) = -1.0;
  }
  return with_minus_identity_B(std::move(A));
}

ConstraintSystem make_matrix_constraint(const std::string& path) {
  return with_minus_identity_B(load_dense_matrix(path));
}

ConstraintSystem build_constraint(const std::string& graph_spec) {
  auto open = graph_spec.find('(');
  auto close = graph_spec.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw std::invalid_argument("malformed graph spec: " + graph_spec);
  std::string name = graph_spec.substr(0, open);
  std::string arg = graph_spec.substr(open + 1, close - open - 1);
  auto parse_n = [&]() {
    int n = 0;
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), n);
    if (ec != std::errc() || ptr != arg.data() + arg.size())
      throw std::invalid_argument("graph spec needs an integer argument: " + graph_spec);
    return n;
  };
  if (name == "identity") return make_identity_constraint(parse_n());
  if (name == "chain_difference") return make_chain_difference_constraint(parse_n());
  if (name == "edge_list") return make_edge_list_constraint(arg);
  if (name == "matrix") return make_matrix_constraint(arg);
  throw std::invalid_argument("unknown graph spec kind: " + name);
}

namespace {

double rayleigh(const Eigen::MatrixXd& M, const Eigen::VectorXd& v) { return v.dot(M * v); }

// Largest eigenvalue of symmetric PSD M by power iteration.
double power_largest(const Eigen::MatrixXd& M) {
  const int n = static_cast<int>(M.rows());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
  // Deterministic perturbation so v is not orthogonal to the top eigenspace.
  for (int i = 0; i < n; ++i) v[i] += 1e-3 * std::cos(1.0 + i);
  v.normalize();
  double lam = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Eigen::VectorXd w = M * v;
    double norm = w.norm();
    if (norm == 0.0) return 0.0;
    w /= norm;
    double lam_new = rayleigh(M, w);
    if (std::abs(lam_new - lam) <= 1e-14 * std::max(1.0, std::abs(lam_new)) && it > 4) {
      return lam_new;
    }
    lam = lam_new;
    v = w;
  }
  return lam;
}

}  // namespace

double smallest_positive_eigenvalue(const Eigen::MatrixXd& A, int dense_threshold) {
  const int n = static_cast<int>(A.cols());
  if (n == 0) throw std::invalid_argument("smallest_positive_eigenvalue: empty matrix");
  Eigen::MatrixXd M = A.transpose() * A;
  if (n <= dense_threshold) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("eigendecomposition failed for A'A");
    const auto& evs = es.eigenvalues();
    double lam_max = evs[n - 1];
    if (lam_max <= 0.0) throw std::runtime_error("A'A has no positive eigenvalue");
    double tol = lam_max * kZeroEigRelTol;
    for (int i = 0; i < n; ++i) {
      if (evs[i] > tol) return evs[i];
    }
    throw std::runtime_error("A'A has no positive eigenvalue");
  }

  // Shifted power iteration: the top eigenvalue of (lam_max I - M) is
  // lam_max - lam_min(M). Null directions are deflated until a positive
  // eigenvalue surfaces.
  double lam_max = power_largest(M);
  if (lam_max <= 0.0) throw std::runtime_error("A'A has no positive eigenvalue");
  double tol = lam_max * kZeroEigRelTol;
  Eigen::MatrixXd shifted = -M;
  shifted.diagonal().array() += lam_max;
  std::vector<Eigen::VectorXd> null_basis;
  const int max_null = 64;
  while (static_cast<int>(null_basis.size()) <= max_null) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    for (int i = 0; i < n; ++i) v[i] += 1e-3 * std::sin(2.0 + 0.7 * i);
    for (const auto& q : null_basis) v -= q.dot(v) * q;
    v.normalize();
    for (int it = 0; it < 20000; ++it) {
      Eigen::VectorXd w = shifted * v;
      for (const auto& q : null_basis) w -= q.dot(w) * q;
      double norm = w.norm();
      if (norm == 0.0) break;
      v = w / norm;
    }
    double lam = rayleigh(M, v);
    if (lam > tol) return lam;
    null_basis.push_back(v);
  }
  throw std::runtime_error("null-space deflation budget exceeded while searching for sigma_A");
}

namespace {

std::string shortest_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

void save_dense_matrix(const std::string& path, const Eigen::MatrixXd& A) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write matrix file: " + path);
  f << A.rows() << ' ' << A.cols() << '\n';
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) {
      if (j) f << ' ';
      f << shortest_double(A(i, j));
    }
    f << '\n';
  }
}

Eigen::MatrixXd load_dense_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open matrix file: " + path);
  int m = 0, n = 0;
  if (!(f >> m >> n) || m < 1 || n < 1)
    throw std::runtime_error("matrix file must start with 'm n': " + path);
  Eigen::MatrixXd A(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      std::string tok;
      if (!(f >> tok)) throw std::runtime_error("matrix file truncated: " + path);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw std::runtime_error("malformed matrix entry '" + tok + "' in " + path);
      A(i, j) = v;
    }
  }
  return A;
}

}  // namespace sadmm
