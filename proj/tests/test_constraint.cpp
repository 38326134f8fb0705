#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "sadmm/constraint.hpp"
#include "sadmm/rng.hpp"

using namespace sadmm;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

// sigma must be an eigenvalue of A'A (relative tolerance 1e-8) and the
// smallest one clear of the numerical null space.
void check_is_smallest_positive_eigenvalue(const Eigen::MatrixXd& A, double sigma) {
  Eigen::MatrixXd M = A.transpose() * A;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  REQUIRE(es.info() == Eigen::Success);
  const auto& evs = es.eigenvalues();
  double lam_max = evs[evs.size() - 1];
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < evs.size(); ++i)
    best = std::min(best, std::abs(evs[i] - sigma));
  CHECK(best <= 1e-8 * std::max(1.0, lam_max));
  for (Eigen::Index i = 0; i < evs.size(); ++i) {
    if (evs[i] < sigma * (1.0 - 1e-6))
      CHECK(evs[i] <= 1e-8 * lam_max);  // everything below sigma is numerically zero
  }
}

}  // namespace

TEST_CASE("identity constraint: structure and sigma") {
  ConstraintSystem C = make_identity_constraint(3);
  CHECK(C.m() == 3);
  CHECK(C.n_x() == 3);
  CHECK((C.A - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
  CHECK((C.B_diag.array() == -1.0).all());
  CHECK((C.b.array() == 0.0).all());
  CHECK(C.sigma_A == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(C.range_feasible);
  CHECK(C.warnings.empty());
  CHECK_THROWS_AS((void)make_identity_constraint(0), std::invalid_argument);
}

TEST_CASE("chain difference constraint rows and frozen sigma values") {
  ConstraintSystem C2 = make_chain_difference_constraint(2);
  CHECK(C2.m() == 1);
  CHECK(C2.A(0, 0) == 1.0);
  CHECK(C2.A(0, 1) == -1.0);
  CHECK(C2.sigma_A == doctest::Approx(2.0).epsilon(1e-10));

  ConstraintSystem C50 = make_chain_difference_constraint(50);
  CHECK(C50.m() == 49);
  double pi = std::acos(-1.0);
  double expected = 4.0 * std::sin(pi / 100.0) * std::sin(pi / 100.0);
  CHECK(C50.sigma_A == doctest::Approx(expected).epsilon(1e-8));
  check_is_smallest_positive_eigenvalue(C50.A, C50.sigma_A);
  CHECK_THROWS_AS((void)make_chain_difference_constraint(1), std::invalid_argument);
}

TEST_CASE("sigma_A is an exact eigenvalue for random matrices") {
  Rng rng(1234);
  for (int trial = 0; trial < 6; ++trial) {
    int m = 3 + trial;
    int n = 2 + trial;
    Eigen::MatrixXd A(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = rng.normal();
    if (trial % 2 == 0) A.col(0) = A.col(n - 1);  // force rank deficiency
    double sigma = smallest_positive_eigenvalue(A);
    check_is_smallest_positive_eigenvalue(A, sigma);
  }
}

TEST_CASE("iterative eigenvalue path agrees with the dense path") {
  // dense_threshold below n forces the shifted power iteration.
  ConstraintSystem C = make_chain_difference_constraint(12);
  double dense = smallest_positive_eigenvalue(C.A, 2000);
  double iterative = smallest_positive_eigenvalue(C.A, 4);
  CHECK(iterative == doctest::Approx(dense).epsilon(1e-6));

  // Full-rank case too.
  Rng rng(7);
  Eigen::MatrixXd A(9, 6);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 6; ++j) A(i, j) = rng.normal();
  CHECK(smallest_positive_eigenvalue(A, 2) ==
        doctest::Approx(smallest_positive_eigenvalue(A, 2000)).epsilon(1e-6));
}

TEST_CASE("zero columns produce a warning naming the column") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 3);
  A(0, 0) = 1.0;
  A(1, 2) = 2.0;  // column 1 is all zero
  std::string path = temp_path("sadmm_test_zero_col.txt");
  save_dense_matrix(path, A);
  ConstraintSystem C = make_matrix_constraint(path);
  REQUIRE(C.warnings.size() == 1);
  CHECK(C.warnings[0].find("zero column 1") != std::string::npos);
  CHECK(C.sigma_A == doctest::Approx(1.0).epsilon(1e-10));
  std::remove(path.c_str());
}

TEST_CASE("edge list constraint builds signed incidence rows") {
  std::string path = temp_path("sadmm_test_edges.txt");
  write_file(path, "0 1\n1 2\n");
  ConstraintSystem C = make_edge_list_constraint(path);
  REQUIRE(C.m() == 2);
  REQUIRE(C.n_x() == 3);
  CHECK(C.A(0, 0) == 1.0);
  CHECK(C.A(0, 1) == -1.0);
  CHECK(C.A(1, 1) == 1.0);
  CHECK(C.A(1, 2) == -1.0);
  CHECK((C.B_diag.array() == -1.0).all());

  ConstraintSystem C5 = make_edge_list_constraint(path, 5);
  CHECK(C5.n_x() == 5);
  CHECK(C5.warnings.size() == 2);  // vertices 3 and 4 touch no edge

  write_file(path, "0 1\nbroken\n");
  bool line2_reported = false;
  try {
    (void)make_edge_list_constraint(path);
  } catch (const std::runtime_error& e) {
    line2_reported = std::string(e.what()).find("line 2") != std::string::npos;
  }
  CHECK(line2_reported);
  write_file(path, "0 -1\n");
  CHECK_THROWS_AS((void)make_edge_list_constraint(path), std::runtime_error);
  write_file(path, "");
  CHECK_THROWS_AS((void)make_edge_list_constraint(path), std::runtime_error);
  write_file(path, "0 7\n");
  CHECK_THROWS_AS((void)make_edge_list_constraint(path, 3), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("dense matrix files round-trip bit-exactly") {
  Rng rng(77);
  Eigen::MatrixXd A(4, 3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = rng.normal() * std::pow(10.0, (i - 2) * 3);
  std::string path = temp_path("sadmm_test_matrix.txt");
  save_dense_matrix(path, A);
  Eigen::MatrixXd B = load_dense_matrix(path);
  REQUIRE(B.rows() == 4);
  REQUIRE(B.cols() == 3);
  CHECK((A - B).norm() == 0.0);

  write_file(path, "2 2\n1 2\n3\n");
  CHECK_THROWS_AS((void)load_dense_matrix(path), std::runtime_error);
  write_file(path, "x 2\n");
  CHECK_THROWS_AS((void)load_dense_matrix(path), std::runtime_error);
  write_file(path, "2 2\n1 2\n3 oops\n");
  CHECK_THROWS_AS((void)load_dense_matrix(path), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("graph spec dispatch") {
  ConstraintSystem Ci = build_constraint("identity(4)");
  CHECK(Ci.n_x() == 4);
  CHECK(Ci.sigma_A == doctest::Approx(1.0));
  ConstraintSystem Cc = build_constraint("chain_difference(5)");
  CHECK(Cc.m() == 4);
  CHECK_THROWS_AS((void)build_constraint("identity(x)"), std::invalid_argument);
  CHECK_THROWS_AS((void)build_constraint("identity"), std::invalid_argument);
  CHECK_THROWS_AS((void)build_constraint("ring(4)"), std::invalid_argument);

  std::string path = temp_path("sadmm_test_edges2.txt");
  write_file(path, "0 1\n");
  ConstraintSystem Ce = build_constraint("edge_list(" + path + ")");
  CHECK(Ce.m() == 1);
  std::remove(path.c_str());
}

TEST_CASE("residual helper applies the diagonal B") {
  ConstraintSystem C = make_chain_difference_constraint(3);
  Eigen::VectorXd x(3), y(2);
  x << 1.0, 4.0, 9.0;
  y << 2.0, 2.0;
  Eigen::VectorXd r = C.residual(x, y);
  // With B = -I and b = 0 the residual is A x - y.
  CHECK(r[0] == doctest::Approx((1.0 - 4.0) - 2.0));
  CHECK(r[1] == doctest::Approx((4.0 - 9.0) - 2.0));
  CHECK((r - (C.A * x - y)).norm() == 0.0);
}
