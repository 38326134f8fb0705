#include "sadmm/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sadmm {

namespace {

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
  throw std::runtime_error("libsvm parse error at line " + std::to_string(line_no) + ": " + what);
}

double parse_double_token(const std::string& tok, int line_no, const char* ctx) {
  // from_chars rejects an explicit plus sign, but "+1" labels and "+0.5"
  // values are ordinary libsvm notation.
  const char* begin = tok.data();
  const char* end = tok.data() + tok.size();
  if (begin != end && *begin == '+') ++begin;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (begin == end || ec != std::errc() || ptr != end)
    parse_fail(line_no, std::string("malformed ") + ctx + " '" + tok + "'");
  return v;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, int n_features_override) {
  Dataset ds;
  int max_index = -1;  // 0-based
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line

    double raw_label = parse_double_token(tok, line_no, "label");
    double label;
    if (raw_label == 1.0)
      label = 1.0;
    else if (raw_label == -1.0)
      label = -1.0;
    else if (raw_label == 0.0)
      label = -1.0;  // declared 0 -> -1 mapping
    else
      parse_fail(line_no, "label '" + tok + "' not in {+1, -1, 0, 1}");

    std::vector<SparseEntry> row;
    int prev_index = -1;
    while (ls >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 >= tok.size())
        parse_fail(line_no, "malformed feature token '" + tok + "'");
      int disk_index = 0;
      {
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + colon, disk_index);
        if (ec != std::errc() || ptr != tok.data() + colon)
          parse_fail(line_no, "malformed feature index in '" + tok + "'");
      }
      if (disk_index < 1) parse_fail(line_no, "feature index must be >= 1 in '" + tok + "'");
      int index = disk_index - 1;
      if (index <= prev_index)
        parse_fail(line_no, "non-increasing feature index " + std::to_string(disk_index));
      std::string val_tok = tok.substr(colon + 1);
      double value = parse_double_token(val_tok, line_no, "feature value");
      row.push_back({index, value});
      prev_index = index;
      if (index > max_index) max_index = index;
    }
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(label);
  }
  ds.n_samples = static_cast<int>(ds.rows.size());
  if (ds.n_samples == 0) throw std::runtime_error("libsvm parse error: no samples");
  ds.n_features = n_features_override >= 0 ? n_features_override : max_index + 1;
  if (max_index + 1 > ds.n_features)
    throw std::runtime_error("libsvm parse error: feature index " + std::to_string(max_index + 1) +
                             " exceeds declared feature count " + std::to_string(ds.n_features));
  return ds;
}

Dataset parse_libsvm_file(const std::string& path, int n_features_override) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open dataset file: " + path);
  return parse_libsvm(f, n_features_override);
}

namespace {

std::string shortest_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

std::string serialize_libsvm(const Dataset& ds) {
  std::string out;
  for (int i = 0; i < ds.n_samples; ++i) {
    out += ds.labels[i] > 0 ? "+1" : "-1";
    for (const auto& e : ds.rows[i]) {
      out += ' ';
      out += std::to_string(e.index + 1);
      out += ':';
      out += shortest_double(e.value);
    }
    out += '\n';
  }
  return out;
}

double row_dot(const std::vector<SparseEntry>& row, const Eigen::VectorXd& x) {
  double acc = 0.0;
  for (const auto& e : row) acc += e.value * x[e.index];
  return acc;
}

void add_scaled_row(Eigen::VectorXd& out, const std::vector<SparseEntry>& row, double scale) {
  for (const auto& e : row) out[e.index] += scale * e.value;
}

double row_squared_norm(const std::vector<SparseEntry>& row) {
  double acc = 0.0;
  for (const auto& e : row) acc += e.value * e.value;
  return acc;
}

}  // namespace sadmm
