#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "annihilate/harness.hpp"
#include "annihilate/hjsolver.hpp"
#include "annihilate/integrator.hpp"
#include "annihilate/levelset.hpp"
#include "annihilate/measures.hpp"

namespace annihilate::io {

// Provenance written as the first line of every output file.
struct Provenance {
  std::string config_hash = "none";
  std::vector<std::pair<std::string, std::string>> extra;
};

// "# annihilate <version> config=<hash> key=value ..."
std::string header_line(const Provenance& prov);
// Parses the key=value fields of a header line (version under "version").
std::vector<std::pair<std::string, std::string>> parse_header(const std::string& line);

// 17 significant digits (%.17g); parse_double reads it back bit-exactly.
std::string format_double(double v);
double parse_double(const std::string& s);

// Columns: t, x_1..x_n, b_1..b_n. The coupling is recorded in the header.
void write_trajectory_csv(std::ostream& os, const std::vector<ParticleState>& samples,
                          const Provenance& prov);
std::vector<ParticleState> read_trajectory_csv(std::istream& is);

// First line {"header": {...}}, then one {tau, y, cluster, pre, post} per line.
void write_events_jsonl(std::ostream& os, const std::vector<EventRecord>& events,
                        const Provenance& prov);
std::vector<EventRecord> read_events_jsonl(std::istream& is);

// Columns: t, x, u.
void write_grid_csv(std::ostream& os, const std::vector<GridFunction>& snapshots,
                    const Provenance& prov);
// Columns: x, u_left, u_right (one row per jump); base and eps in the header.
void write_step_function_csv(std::ostream& os, const StepFunction& u, const Provenance& prov);
// Columns: location, weight.
void write_measure_csv(std::ostream& os, const SignedAtomicMeasure& mu, const Provenance& prov);
// Columns: n, e_n, events, runtime_s.
void write_convergence_csv(std::ostream& os, const ConvergenceTable& table, const Provenance& prov);
// Columns: x, then u_n at t_end for every ladder entry.
void write_profiles_csv(std::ostream& os, const ConvergenceTable& table, const Provenance& prov);

std::string properties_json(const PropertyReport& report, const Provenance& prov);

}  // namespace annihilate::io
