#ifndef FUSEOPT_TRACE_HPP
#define FUSEOPT_TRACE_HPP

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fuseopt/errors.hpp"

namespace fuseopt {

/// Which update rule produced a given iteration. FUSE-PV runs label each
/// row with the phase actually applied (adam before the switch, lbfgs or
/// sgd after); soft-blend runs label every row fuse.
enum class Phase { sgd, adam, lbfgs, fuse };

inline const char* phase_name(Phase p) {
  switch (p) {
    case Phase::sgd: return "sgd";
    case Phase::adam: return "adam";
    case Phase::lbfgs: return "lbfgs";
    case Phase::fuse: return "fuse";
  }
  throw internal_error("unknown phase");
}

inline Phase phase_from_name(const std::string& s) {
  if (s == "sgd") return Phase::sgd;
  if (s == "adam") return Phase::adam;
  if (s == "lbfgs") return Phase::lbfgs;
  if (s == "fuse") return Phase::fuse;
  throw parse_error("unknown phase label: '" + s + "'");
}

/// What one optimizer step reports back to the experiment loop.
struct StepRecord {
  double loss;                 // batch loss at the pre-step point
  double grad_norm;            // Euclidean norm of the batch gradient there
  double step_size;            // alpha actually used
  std::optional<double> theta; // blend weight, soft-blend runs only
  Phase phase;
};

/// One row of the per-iteration log.
struct TraceRecord {
  long iter;
  long epoch;
  Phase phase;
  double loss;
  double grad_norm;
  double step_size;
  std::optional<double> theta;
  long long wall_ns;
};

/// Shortest-faithful float text: 17 significant digits round-trip any double.
inline std::string format_double17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline constexpr const char* kTraceHeader = "iter,epoch,phase,loss,grad_norm,step_size,theta,wall_ns";

inline void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
  out << kTraceHeader << "\n";
  for (const auto& r : trace) {
    out << r.iter << ',' << r.epoch << ',' << phase_name(r.phase) << ','
        << format_double17(r.loss) << ',' << format_double17(r.grad_norm) << ','
        << format_double17(r.step_size) << ',';
    if (r.theta) out << format_double17(*r.theta);
    out << ',' << r.wall_ns << "\n";
  }
}

inline void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open trace file for writing: " + path);
  write_trace_csv(out, trace);
  if (!out) throw io_error("trace write failed: " + path);
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline double parse_double_field(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw parse_error("");
    return v;
  } catch (...) {
    throw parse_error(std::string("bad ") + what + " field: '" + s + "'");
  }
}

}  // namespace detail

inline std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw schema_error("empty trace");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw schema_error("unexpected trace header: '" + line + "'");
  std::vector<TraceRecord> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split_fields(line);
    if (f.size() != 8) throw schema_error("trace row with " + std::to_string(f.size()) + " fields");
    TraceRecord r{std::stol(f[0]),
                  std::stol(f[1]),
                  phase_from_name(f[2]),
                  detail::parse_double_field(f[3], "loss"),
                  detail::parse_double_field(f[4], "grad_norm"),
                  detail::parse_double_field(f[5], "step_size"),
                  f[6].empty() ? std::nullopt
                               : std::optional<double>(detail::parse_double_field(f[6], "theta")),
                  std::stoll(f[7])};
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open trace file: " + path);
  return read_trace_csv(in);
}

/// Long-format loss-curve data, one row per (label, iteration):
/// label,iter,loss,grad_norm. Labels pass through verbatim.
inline void emit_plot_data(const std::vector<std::pair<std::string, std::vector<TraceRecord>>>& traces,
                           std::ostream& out) {
  if (traces.empty()) throw invalid_input_error("emit_plot_data: no traces");
  out << "label,iter,loss,grad_norm\n";
  for (const auto& [label, trace] : traces) {
    for (const auto& r : trace) {
      out << label << ',' << r.iter << ',' << format_double17(r.loss) << ','
          << format_double17(r.grad_norm) << "\n";
    }
  }
}

inline void emit_plot_data(const std::vector<std::pair<std::string, std::vector<TraceRecord>>>& traces,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open plot-data file for writing: " + path);
  emit_plot_data(traces, out);
  if (!out) throw io_error("plot-data write failed: " + path);
}

}  // namespace fuseopt

#endif  // FUSEOPT_TRACE_HPP
