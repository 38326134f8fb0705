#ifndef SADMM_CONSTRAINT_HPP
#define SADMM_CONSTRAINT_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace sadmm {

// Linear coupling A x + B y = b with B restricted to a diagonal (builders
// produce B = -I). sigma_A is the smallest positive eigenvalue of A'A.
struct ConstraintSystem {
  Eigen::MatrixXd A;       // m x n_x
  Eigen::VectorXd B_diag;  // m entries; B = diag(B_diag)
  Eigen::VectorXd b;       // m
  double sigma_A = 0.0;
  bool range_feasible = false;  // true when B = -I and b = 0
  std::vector<std::string> warnings;

  int m() const { return static_cast<int>(A.rows()); }
  int n_x() const { return static_cast<int>(A.cols()); }
  Eigen::VectorXd apply_B(const Eigen::VectorXd& y) const { return B_diag.cwiseProduct(y); }
  Eigen::VectorXd residual(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    return A * x + apply_B(y) - b;
  }
};

ConstraintSystem make_identity_constraint(int n);
// (n-1) x n rows e_i' - e_{i+1}'.
ConstraintSystem make_chain_difference_constraint(int n);
// Edge-list file: lines "i j" with 0-based vertex ids; row e_i' - e_j' per
// edge. n_vertices = max id + 1 unless overridden (>= 0).
ConstraintSystem make_edge_list_constraint(const std::string& path, int n_vertices = -1);
// Dense matrix file: first line "m n", then m whitespace-separated rows.
ConstraintSystem make_matrix_constraint(const std::string& path);

// Dispatch on "identity(n)", "chain_difference(n)", "edge_list(path)", "matrix(path)".
ConstraintSystem build_constraint(const std::string& graph_spec);

// Smallest positive eigenvalue of A'A: dense symmetric eigendecomposition for
// n_x <= dense_threshold, shifted power iteration (with null-space deflation)
// above. Eigenvalues <= rel_tol * lambda_max count as zero.
double smallest_positive_eigenvalue(const Eigen::MatrixXd& A, int dense_threshold = 2000);

// Dense matrix file IO; values round-trip bit-exactly.
void save_dense_matrix(const std::string& path, const Eigen::MatrixXd& A);
Eigen::MatrixXd load_dense_matrix(const std::string& path);

}  // namespace sadmm

#endif  // SADMM_CONSTRAINT_HPP
