#include "sadmm/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace sadmm {

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

const char* kTraceHeader =
    "k,loss_F,aug_lagrangian,potential_P,residual_norm,dx_norm,dy_norm,dlam_norm,"
    "stat_x,stat_y,stat_r,grad_calls,wall_time_s";

std::string trace_row(const TraceRecord& r) {
  std::string row = std::to_string(r.k);
  auto add = [&](double v) {
    row += ',';
    row += format_double(v);
  };
  add(r.loss_F);
  add(r.aug_lagrangian);
  add(r.potential_P);
  add(r.residual_norm);
  add(r.dx_norm);
  add(r.dy_norm);
  add(r.dlam_norm);
  add(r.stat_x);
  add(r.stat_y);
  add(r.stat_r);
  row += ',';
  row += std::to_string(r.grad_calls);
  add(r.wall_time_s);
  return row;
}

void write_trace_csv(const std::string& path, const TraceRecord& initial,
                     const std::vector<TraceRecord>& trace) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write trace CSV: " + path);
  f << kTraceHeader << '\n';
  f << trace_row(initial) << '\n';
  for (const auto& r : trace) f << trace_row(r) << '\n';
  if (!f) throw std::runtime_error("write failure on trace CSV: " + path);
}

const char* kProbeHeader = "k,stat_x,stat_y,stat_r,xi_x,bias_measured,bias_predicted";

ProbeRow::ProbeRow()
    : stat_x(std::numeric_limits<double>::quiet_NaN()),
      stat_y(std::numeric_limits<double>::quiet_NaN()),
      stat_r(std::numeric_limits<double>::quiet_NaN()),
      xi_x(std::numeric_limits<double>::quiet_NaN()),
      bias_measured(std::numeric_limits<double>::quiet_NaN()),
      bias_predicted(std::numeric_limits<double>::quiet_NaN()) {}

void write_probe_csv(const std::string& path, const std::vector<ProbeRow>& rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write probe CSV: " + path);
  f << kProbeHeader << '\n';
  for (const auto& r : rows) {
    f << r.k << ',' << format_double(r.stat_x) << ',' << format_double(r.stat_y) << ','
      << format_double(r.stat_r) << ',' << format_double(r.xi_x) << ','
      << format_double(r.bias_measured) << ',' << format_double(r.bias_predicted) << '\n';
  }
  if (!f) throw std::runtime_error("write failure on probe CSV: " + path);
}

}  // namespace sadmm
