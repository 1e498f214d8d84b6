#pragma once

#include <abphase/scenario.hpp>

#include <ostream>
#include <string>

namespace abphase {

// Aligned table of one run, followed by the pairwise deviations.
void print_table(std::ostream& os, const RunReport& rep, bool diagnostics = false);
void print_sweep(std::ostream& os, const SweepReport& rep, bool diagnostics = false);

// CSV columns: scenario, method, phase_rad, phase_normalized, err_estimate, n_evals, wall_ms, converged.
void write_csv_header(std::ostream& os);
void write_csv_rows(std::ostream& os, const RunReport& rep, const std::string& label);
void write_csv(std::ostream& os, const RunReport& rep);
void write_csv(std::ostream& os, const SweepReport& rep);

}  // namespace abphase
