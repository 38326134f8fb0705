#ifndef SADMM_CSV_HPP
#define SADMM_CSV_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sadmm/admm.hpp"

namespace sadmm {

// Shortest round-trip decimal form (std::to_chars); NaN -> "" (empty field).
std::string format_double(double v);

// Trace CSV schema, in order:
// k,loss_F,aug_lagrangian,potential_P,residual_norm,dx_norm,dy_norm,dlam_norm,
// stat_x,stat_y,stat_r,grad_calls,wall_time_s
extern const char* kTraceHeader;
std::string trace_row(const TraceRecord& r);
void write_trace_csv(const std::string& path, const TraceRecord& initial,
                     const std::vector<TraceRecord>& trace);

// Probe CSV schema: k,stat_x,stat_y,stat_r,xi_x,bias_measured,bias_predicted
extern const char* kProbeHeader;
struct ProbeRow {
  int k = 0;
  double stat_x, stat_y, stat_r, xi_x, bias_measured, bias_predicted;
  ProbeRow();
};
void write_probe_csv(const std::string& path, const std::vector<ProbeRow>& rows);

}  // namespace sadmm

#endif  // SADMM_CSV_HPP
