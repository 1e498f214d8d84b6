#include <abphase/report.hpp>

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <vector>

namespace abphase {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// CSV fields are plain; quote anything with a comma or quote in it.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string sweep_label(const SweepReport& rep, std::size_t i) {
  std::ostringstream os;
  os.precision(12);
  os << rep.scenario << "[" << rep.parameter << "=" << rep.values[i] << "]";
  return os.str();
}

}  // namespace

void print_table(std::ostream& os, const RunReport& rep, bool diagnostics) {
  const char* ref_name = rep.kind == ScenarioKind::Magnetic   ? "q Phi / hbar"
                         : rep.kind == ScenarioKind::Electric ? "closed-form electric phase"
                                                              : "q1 q2 / 4 pi eps0 d";
  os << "scenario " << rep.scenario << " (" << to_string(rep.kind) << "), reference " << ref_name << " = "
     << fmt("%.12g", rep.reference) << "\n";

  std::vector<std::vector<std::string>> rows;
  rows.push_back({"method", rep.kind == ScenarioKind::EnergyIdentity ? "value" : "phase_rad", "normalized",
                  "err_estimate", "n_evals", "wall_ms", "converged"});
  for (const auto& r : rep.runs) {
    if (!r.error.empty()) {
      rows.push_back({r.method, "-", "-", "-", "-", fmt("%.1f", r.wall_ms), "error"});
      continue;
    }
    rows.push_back({r.method, fmt("%.12g", r.result.phase), fmt("%.10f", r.normalized),
                    fmt("%.3g", r.result.abs_error_estimate), std::to_string(r.result.n_evaluations),
                    fmt("%.1f", r.wall_ms), r.result.converged ? "yes" : "NO"});
  }
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  for (const auto& row : rows) {
    os << "  ";
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      os << (c == 0 ? row[c] + pad : pad + row[c]) << (c + 1 < row.size() ? "  " : "\n");
    }
  }
  for (const auto& r : rep.runs) {
    if (!r.error.empty()) os << "  " << r.method << " failed: " << r.error << "\n";
    else if (!r.result.note.empty()) os << "  " << r.method << ": " << r.result.note << "\n";
  }
  if (!rep.deviations.empty()) {
    os << "  deviations (normalized):\n";
    for (const auto& d : rep.deviations) os << "    " << d.a << " vs " << d.b << ": " << fmt("%.3g", d.value) << "\n";
  }
  if (diagnostics)
    for (const auto& r : rep.runs)
      for (const auto& [k, v] : r.result.diagnostics) os << "  " << r.method << "." << k << " = " << fmt("%.6g", v) << "\n";
}

void print_sweep(std::ostream& os, const SweepReport& rep, bool diagnostics) {
  os << "sweep " << rep.scenario << " over " << rep.parameter << "\n";
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    os << "\n" << rep.parameter << " = " << fmt("%.12g", rep.values[i]) << "\n";
    if (!rep.errors[i].empty())
      os << "  failed: " << rep.errors[i] << "\n";
    else
      print_table(os, rep.runs[i], diagnostics);
  }
  os << "\nconvergence:\n";
  for (const auto& m : rep.monotonicity) os << "  " << m << "\n";
}

void write_csv_header(std::ostream& os) {
  os << "scenario,method,phase_rad,phase_normalized,err_estimate,n_evals,wall_ms,converged\n";
}

void write_csv_rows(std::ostream& os, const RunReport& rep, const std::string& label) {
  for (const auto& r : rep.runs) {
    const bool ok = r.error.empty();
    os << csv_field(label) << "," << csv_field(r.method) << "," << (ok ? fmt("%.17g", r.result.phase) : "") << ","
       << (ok ? fmt("%.17g", r.normalized) : "") << "," << (ok ? fmt("%.6g", r.result.abs_error_estimate) : "") << ","
       << r.result.n_evaluations << "," << fmt("%.3f", r.wall_ms) << "," << (r.ok() ? "true" : "false") << "\n";
  }
}

void write_csv(std::ostream& os, const RunReport& rep) {
  write_csv_header(os);
  write_csv_rows(os, rep, rep.scenario);
}

void write_csv(std::ostream& os, const SweepReport& rep) {
  write_csv_header(os);
  for (std::size_t i = 0; i < rep.runs.size(); ++i) write_csv_rows(os, rep.runs[i], sweep_label(rep, i));
  for (const auto& m : rep.monotonicity) os << "# " << m << "\n";
}

}  // namespace abphase
