#include "annihilate/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "annihilate/errors.hpp"
#include "annihilate/version.hpp"

namespace annihilate::io {

using nlohmann::json;

std::string header_line(const Provenance& prov) {
  std::string s = std::string("# annihilate ") + kVersion + " config=" + prov.config_hash;
  for (const auto& [k, v] : prov.extra) s += " " + k + "=" + v;
  return s;
}

std::vector<std::pair<std::string, std::string>> parse_header(const std::string& line) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream is(line);
  std::string tok;
  is >> tok;  // '#'
  is >> tok;  // tool name
  if (is >> tok) out.emplace_back("version", tok);
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) out.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    // from_chars does not accept "inf"/"nan" spelled by other writers.
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
    throw ConfigError("malformed number '" + s + "'");
  }
  return v;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const std::vector<ParticleState>& samples,
                          const Provenance& prov) {
  Provenance p = prov;
  const std::size_t n = samples.empty() ? 0 : samples.front().size();
  p.extra.emplace_back("coupling", samples.empty() ? "nan" : format_double(samples.front().coupling));
  os << header_line(p) << '\n';
  os << 't';
  for (std::size_t i = 1; i <= n; ++i) os << ",x_" << i;
  for (std::size_t i = 1; i <= n; ++i) os << ",b_" << i;
  os << '\n';
  for (const ParticleState& s : samples) {
    os << format_double(s.time);
    for (double x : s.positions) os << ',' << format_double(x);
    for (int b : s.charges) os << ',' << b;
    os << '\n';
  }
}

std::vector<ParticleState> read_trajectory_csv(std::istream& is) {
  std::string line;
  double coupling = NAN;
  std::vector<ParticleState> out;
  std::size_t n = 0;
  bool have_columns = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      for (const auto& [k, v] : parse_header(line))
        if (k == "coupling") coupling = parse_double(v);
      continue;
    }
    const std::vector<std::string> cells = split(line, ',');
    if (!have_columns) {
      if (cells.empty() || cells[0] != "t" || cells.size() % 2 != 1)
        throw ConfigError("trajectory CSV has an unexpected column header");
      n = (cells.size() - 1) / 2;
      have_columns = true;
      continue;
    }
    if (cells.size() != 2 * n + 1) throw ConfigError("trajectory CSV row has the wrong width");
    ParticleState s;
    s.time = parse_double(cells[0]);
    s.coupling = coupling;
    for (std::size_t i = 0; i < n; ++i) s.positions.push_back(parse_double(cells[1 + i]));
    for (std::size_t i = 0; i < n; ++i) s.charges.push_back(std::stoi(cells[1 + n + i]));
    out.push_back(std::move(s));
  }
  return out;
}

void write_events_jsonl(std::ostream& os, const std::vector<EventRecord>& events,
                        const Provenance& prov) {
  json header = {{"tool", "annihilate"}, {"version", kVersion}, {"config_hash", prov.config_hash}};
  for (const auto& [k, v] : prov.extra) header[k] = v;
  os << json{{"header", header}}.dump() << '\n';
  for (const EventRecord& e : events) {
    json j;
    j["tau"] = e.tau;
    j["y"] = e.y;
    j["cluster"] = e.cluster;
    j["pre"] = e.pre_charges;
    j["post"] = e.post_charges;
    os << j.dump() << '\n';
  }
}

std::vector<EventRecord> read_events_jsonl(std::istream& is) {
  std::vector<EventRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (j.contains("header")) continue;
    EventRecord e;
    e.tau = j.at("tau").get<double>();
    e.y = j.at("y").get<double>();
    e.cluster = j.at("cluster").get<std::vector<std::size_t>>();
    e.pre_charges = j.at("pre").get<std::vector<int>>();
    e.post_charges = j.at("post").get<std::vector<int>>();
    out.push_back(std::move(e));
  }
  return out;
}

void write_grid_csv(std::ostream& os, const std::vector<GridFunction>& snapshots,
                    const Provenance& prov) {
  os << header_line(prov) << '\n' << "t,x,u\n";
  for (const GridFunction& g : snapshots)
    for (std::size_t i = 0; i < g.size(); ++i)
      os << format_double(g.time) << ',' << format_double(g.x(i)) << ',' << format_double(g.values[i])
         << '\n';
}

void write_step_function_csv(std::ostream& os, const StepFunction& u, const Provenance& prov) {
  Provenance p = prov;
  p.extra.emplace_back("base", format_double(u.base));
  p.extra.emplace_back("eps", format_double(u.eps));
  os << header_line(p) << '\n' << "x,u_left,u_right\n";
  double v = u.base;
  for (const Jump& j : u.jumps) {
    os << format_double(j.location) << ',' << format_double(v) << ',' << format_double(v + j.size) << '\n';
    v += j.size;
  }
}

void write_measure_csv(std::ostream& os, const SignedAtomicMeasure& mu, const Provenance& prov) {
  os << header_line(prov) << '\n' << "location,weight\n";
  for (const Atom& a : mu.atoms) os << format_double(a.location) << ',' << format_double(a.weight) << '\n';
}

void write_convergence_csv(std::ostream& os, const ConvergenceTable& table, const Provenance& prov) {
  Provenance p = prov;
  p.extra.emplace_back("datum", table.datum);
  os << header_line(p) << '\n' << "n,e_n,events,runtime_s\n";
  for (const ConvergenceRow& r : table.rows)
    os << r.n << ',' << format_double(r.e_n) << ',' << r.events << ',' << format_double(r.runtime_s) << '\n';
}

void write_profiles_csv(std::ostream& os, const ConvergenceTable& table, const Provenance& prov) {
  Provenance p = prov;
  p.extra.emplace_back("datum", table.datum);
  p.extra.emplace_back("t", table.snapshot_times.empty() ? "0" : format_double(table.snapshot_times.back()));
  os << header_line(p) << "\nx";
  const bool has_ref = !table.reference.snapshots.empty();
  if (has_ref) os << ",u_ref";
  for (const ConvergenceRow& r : table.rows) os << ",u_" << r.n;
  os << '\n';
  for (std::size_t k = 0; k < table.profile_x.size(); ++k) {
    const double x = table.profile_x[k];
    os << format_double(x);
    if (has_ref) os << ',' << format_double(table.reference.snapshots.back().interpolate(x));
    for (const auto& prof : table.final_profiles)
      os << ',' << (k < prof.size() ? format_double(prof[k]) : std::string("nan"));
    os << '\n';
  }
}

std::string properties_json(const PropertyReport& report, const Provenance& prov) {
  json j;
  j["header"] = {{"tool", "annihilate"}, {"version", kVersion}, {"config_hash", prov.config_hash}};
  for (const auto& [k, v] : prov.extra) j["header"][k] = v;
  j["seed"] = report.seed;
  j["runs"] = report.runs;
  j["runs_with_events"] = report.runs_with_events;
  j["total_events"] = report.total_events;
  j["pass"] = report.pass();
  json inv = json::object();
  for (const InvariantResult& r : report.invariants) {
    json e = {{"pass", r.pass},
              {"worst", std::isfinite(r.worst) ? json(r.worst) : json(nullptr)},
              {"threshold", r.threshold},
              {"checked", r.checked},
              {"informational", r.informational}};
    if (r.aux != 0.0) e["aux"] = r.aux;
    if (!r.detail.empty()) e["detail"] = r.detail;
    inv[r.name] = e;
  }
  j["invariants"] = inv;
  return j.dump(2) + "\n";
}

}  // namespace annihilate::io
