#ifndef SADMM_DATASET_HPP
#define SADMM_DATASET_HPP

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace sadmm {

struct SparseEntry {
  int index;     // 0-based feature index
  double value;
};

// Sparse sample matrix with +/-1 labels: rows a_i, labels b_i.
struct Dataset {
  int n_samples = 0;
  int n_features = 0;
  std::vector<std::vector<SparseEntry>> rows;  // indices strictly increasing per row
  std::vector<double> labels;                  // each exactly -1.0 or +1.0
};

// LIBSVM text reader. Disk format: "label idx:val idx:val ..." with 1-based
// indices; labels in {+1, -1, 0, 1}, with 0 mapped to -1 (declared mapping).
// Indices are shifted to 0-based. n_features = max index + 1 unless
// n_features_override >= 0. Malformed tokens and non-increasing indices
// produce errors that carry the 1-based line number.
Dataset parse_libsvm(std::istream& in, int n_features_override = -1);
Dataset parse_libsvm_file(const std::string& path, int n_features_override = -1);

// Canonical text form: "+1"/"-1" labels, 1-based indices, shortest
// round-trip value formatting, one sample per line, '\n' terminated.
std::string serialize_libsvm(const Dataset& ds);

// Row helpers (dense x against sparse rows).
double row_dot(const std::vector<SparseEntry>& row, const Eigen::VectorXd& x);
void add_scaled_row(Eigen::VectorXd& out, const std::vector<SparseEntry>& row, double scale);
double row_squared_norm(const std::vector<SparseEntry>& row);

}  // namespace sadmm

#endif  // SADMM_DATASET_HPP
