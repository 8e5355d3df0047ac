#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "annihilate/errors.hpp"
#include "annihilate/harness.hpp"
#include "annihilate/io.hpp"
#include "annihilate/measures.hpp"
#include "annihilate/moments.hpp"
#include "annihilate/version.hpp"
#include "config.hpp"

namespace annihilate::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Errors raised while preparing inputs are configuration errors; after that
// they are simulation errors.
enum class Phase { Prepare, Compute };

struct Result {
  json summary = json::object();
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  int exit_code = kExitOk;
  json error;  // set together with a non-zero exit code
};

json header_json(const io::Provenance& prov) {
  json h = {{"tool", "annihilate"}, {"version", kVersion}, {"config_hash", prov.config_hash}};
  for (const auto& [k, v] : prov.extra) h[k] = v;
  return h;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

ParticleState initial_state(const InitialSection& in) {
  if (!in.present) throw ConfigError("missing 'initial' section");
  ParticleState s = make_state(in.positions, in.charges, in.coupling, in.time);
  const ValidityReport rep = validate_state(s);
  if (!rep.ok()) {
    std::string what = "initial state is invalid:";
    for (const auto& v : rep.violations) what += " " + v + ";";
    throw ConfigError(what);
  }
  return s;
}

Result cmd_simulate(const Config& c, const io::Provenance& prov, Phase& phase) {
  const ParticleState init = initial_state(c.initial);
  IntegratorConfig ic = c.integrator;
  if (!(ic.t_end > init.time)) throw ConfigError("integrator.t_end must exceed initial.time");
  for (std::size_t k = 1; k < c.samples; ++k)
    ic.sample_times.push_back(init.time + (ic.t_end - init.time) * static_cast<double>(k) /
                                              static_cast<double>(c.samples));
  std::sort(ic.sample_times.begin(), ic.sample_times.end());

  phase = Phase::Compute;
  spdlog::info("simulate: n={} t_end={}", init.size(), ic.t_end);
  const Trajectory traj = evolve(init, ic);
  spdlog::info("simulate: {} events, {} samples", traj.events.size(), traj.samples.size());

  Result r;
  std::ostringstream csv, events;
  io::write_trajectory_csv(csv, traj.samples, prov);
  io::write_events_jsonl(events, traj.events, prov);
  r.files = {{"trajectory.csv", csv.str()}, {"events.jsonl", events.str()}};
  r.summary = {{"events", traj.events.size()},
               {"samples", traj.samples.size()},
               {"final_time", traj.samples.back().time},
               {"net_charge", net_charge(traj.samples.back())}};
  return r;
}

Result cmd_hj(const Config& c, const io::Provenance& prov, Phase& phase) {
  const InitialDatum datum = catalog_datum(c.hj.datum);
  const double eps = c.hj.eps;
  phase = Phase::Compute;
  const HJSolution sol = solve_hj([&](double x) { return datum.u0(x, eps); }, c.scheme);
  spdlog::info("hj: {} steps, {} snapshots", sol.steps, sol.snapshots.size());

  Result r;
  std::ostringstream csv;
  io::write_grid_csv(csv, sol.snapshots, prov);
  r.files = {{"hj.csv", csv.str()}};
  const GridFunction& first = sol.snapshots.front();
  const GridFunction& last = sol.snapshots.back();
  r.summary = {{"steps", sol.steps},
               {"snapshots", sol.snapshots.size()},
               {"sup_norm", {first.sup_norm(), last.sup_norm()}},
               {"lipschitz", {first.lipschitz(), last.lipschitz()}}};
  return r;
}

Result cmd_converge(const Config& c, const io::Provenance& prov, unsigned threads, Phase& phase) {
  ExperimentSpec spec = c.experiment;
  spec.threads = std::max(1u, threads);
  phase = Phase::Compute;
  const ConvergenceTable table = run_convergence(spec);

  Result r;
  std::ostringstream conv, profiles;
  io::write_convergence_csv(conv, table, prov);
  io::write_profiles_csv(profiles, table, prov);
  r.files = {{"convergence.csv", conv.str()}, {"profiles.csv", profiles.str()}};
  if (!table.reference.snapshots.empty()) {
    std::ostringstream ref;
    io::write_grid_csv(ref, table.reference.snapshots, prov);
    r.files.emplace_back("reference.csv", ref.str());
  }

  json rows = json::array();
  std::vector<std::string> failed;
  for (const ConvergenceRow& row : table.rows) {
    json e = {{"n", row.n},
              {"e_n", number_or_null(row.e_n)},
              {"events", row.events},
              {"particles", row.particles},
              {"runtime_s", row.runtime_s},
              {"crossing_error", number_or_null(row.crossing_error)}};
    if (!row.error.empty()) {
      e["error"] = row.error;
      failed.push_back(std::to_string(row.n));
    }
    rows.push_back(e);
  }
  const double first = table.rows.front().e_n;
  const double last = table.rows.back().e_n;
  json props = {{"header", header_json(prov)},
                {"datum", table.datum},
                {"slack", spec.slack},
                {"monotone", table.monotone},
                {"ratio_last_first", number_or_null(first > 0.0 ? last / first : 0.0)},
                {"rows", rows}};
  r.files.emplace_back("properties.json", props.dump(2) + "\n");
  r.summary = {{"datum", table.datum}, {"monotone", table.monotone}, {"rows", table.rows.size()}};

  if (!failed.empty()) {
    std::string which;
    for (const auto& n : failed) which += (which.empty() ? "" : ",") + n;
    r.exit_code = kExitSimulationError;
    r.error = {{"code", "RowFailed"}, {"message", "convergence rows failed: n=" + which}};
  }
  return r;
}

Result cmd_verify(const Config& c, const io::Provenance& prov, std::uint64_t seed, Phase& phase) {
  PropertySuiteConfig pc;
  pc.seed = seed;
  pc.sizes = c.verify.sizes;
  pc.runs = c.verify.runs;
  pc.uniform_samples = c.verify.uniform_samples;
  pc.stencil = c.verify.stencil;
  std::optional<ParticleState> fixture;
  if (c.initial.present) {
    fixture = initial_state(c.initial);
    if (!(c.integrator.t_end > fixture->time))
      throw ConfigError("integrator.t_end must exceed initial.time");
  }

  phase = Phase::Compute;
  PropertyReport report = run_property_suite(pc);
  if (fixture) {
    const Trajectory traj =
        check_initial_state(*fixture, c.integrator, pc.uniform_samples, pc.stencil, report.invariants);
    report.total_events += traj.events.size();
  }

  Result r;
  r.files = {{"properties.json", io::properties_json(report, prov)}};
  json failed = json::array();
  for (const InvariantResult& inv : report.invariants)
    if (!inv.pass && !inv.informational) failed.push_back(inv.name);
  r.summary = {{"pass", report.pass()},
               {"runs", report.runs},
               {"runs_with_events", report.runs_with_events},
               {"total_events", report.total_events},
               {"failed", failed}};
  if (!report.pass()) {
    r.exit_code = kExitInvariantFailure;
    r.error = {{"code", "InvariantFailed"}, {"message", "invariants failed"}, {"failed", failed}};
  }
  return r;
}

Result cmd_measure(const Config& c, const io::Provenance& prov, Phase& phase) {
  const MeasureSection& m = c.measure;
  const TestDictionary dict{m.lo, m.hi, m.levels};
  const auto omega = [&](double r) { return m.omega_lipschitz * r; };
  const InitialDatum datum = catalog_datum(m.datum);
  phase = Phase::Compute;

  Result r;
  std::vector<SignedAtomicMeasure> mus;
  json rows = json::array();
  for (std::size_t n : m.ladder) {
    const double eps = 1.0 / static_cast<double>(n);
    SignedAtomicMeasure mu;
    json row = {{"n", n}};
    if (m.family == "dirac_pair") {
      mu.atoms = {{0.0, -1.0}, {eps, 1.0}};
      row["narrow_proxy"] = narrow_distance_proxy(mu, SignedAtomicMeasure{}, dict);
      row["cdf_sup_distance"] = cdf(mu).sup_norm();
    } else {
      const auto u0 = [&](double x) { return datum.u0(x, eps); };
      const ParticleState s = sample_particles(u0, n, m.a, datum.window_lo, datum.window_hi);
      mu = measure_from_particles(s);
      std::vector<double> extra;
      for (int k = 0; k <= 2048; ++k)
        extra.push_back(datum.window_lo + (datum.window_hi - datum.window_lo) * k / 2048.0);
      const StepFunction F = cdf(mu, eps);
      row["cdf_sup_distance"] = sup_distance(
          F, [&](double x) { return u0(x) - datum.left_value; }, datum.window_lo - 1.0,
          datum.window_hi + 1.0, extra);
    }
    std::ostringstream csv;
    io::Provenance p = prov;
    p.extra.emplace_back("n", std::to_string(n));
    io::write_measure_csv(csv, mu, p);
    r.files.emplace_back("measure_n" + std::to_string(n) + ".csv", csv.str());
    mus.push_back(std::move(mu));
    rows.push_back(row);
  }
  const AecReport aec = aec_modulus(mus, omega, m.threshold);
  for (std::size_t k = 0; k < rows.size(); ++k) rows[k]["s_n"] = aec.s[k];

  json doc = {{"header", header_json(prov)},
              {"family", m.family},
              {"aec_pass", aec.pass},
              {"threshold", m.threshold},
              {"rows", rows}};
  r.files.emplace_back("measure.json", doc.dump(2) + "\n");
  r.summary = {{"family", m.family}, {"aec_pass", aec.pass}, {"rows", rows.size()}};
  if (m.family == "dirac_pair") r.summary["narrow_proxy_last"] = rows.back()["narrow_proxy"];
  return r;
}

Result cmd_moments(const Config& c, const io::Provenance& prov, Phase& phase) {
  std::vector<double> x = c.moment_positions;
  if (x.empty() && c.initial.present) x = c.initial.positions;
  if (x.empty()) throw ConfigError("moments needs 'moments.positions' or 'initial.positions'");
  phase = Phase::Compute;

  const MomentVector mv = moments(x);
  const std::vector<long double> e = moments_to_elementary(mv);
  const std::vector<double> rec = reconstruct_positions(mv);
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) worst = std::max(worst, std::abs(rec[i] - sorted[i]));

  json el = json::array();
  for (long double v : e) el.push_back(static_cast<double>(v));
  json doc = {{"header", header_json(prov)},
              {"positions", x},
              {"moments", mv.values},
              {"elementary", el},
              {"reconstructed", rec},
              {"max_reconstruction_error", worst}};
  Result r;
  r.files = {{"moments.json", doc.dump(2) + "\n"}};
  r.summary = {{"n", x.size()}, {"max_reconstruction_error", worst}};
  return r;
}

void write_files(const std::string& dir, const Result& r) {
  fs::create_directories(dir);
  for (const auto& [name, content] : r.files) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    spdlog::debug("wrote {}", path.string());
  }
}

void print_error(std::ostream& os, const std::string& command, const std::string& code,
                 const std::string& message, int exit_code, json extra = json::object()) {
  json j = {{"status", "error"},
            {"command", command},
            {"code", code},
            {"message", message},
            {"exit_code", exit_code}};
  for (auto& [k, v] : extra.items()) j[k] = v;
  os << j.dump() << std::endl;
}

}  // namespace

int run_command(const Options& options, std::ostream& report) {
  const std::string& cmd = options.command;
  Phase phase = Phase::Prepare;
  Result result;
  try {
    Config config = options.config_path.empty() ? parse_config(json::object())
                                                : load_config(options.config_path);
    io::Provenance prov{config.hash, {{"command", cmd}}};
    if (cmd == "verify") prov.extra.emplace_back("seed", std::to_string(options.seed));
    spdlog::debug("{}: config hash {}", cmd, config.hash);

    if (cmd == "simulate") result = cmd_simulate(config, prov, phase);
    else if (cmd == "hj") result = cmd_hj(config, prov, phase);
    else if (cmd == "converge") result = cmd_converge(config, prov, options.threads, phase);
    else if (cmd == "verify") result = cmd_verify(config, prov, options.seed, phase);
    else if (cmd == "measure") result = cmd_measure(config, prov, phase);
    else if (cmd == "moments") result = cmd_moments(config, prov, phase);
    else throw ConfigError("unknown command '" + cmd + "'");
  } catch (const ConfigError& e) {
    print_error(report, cmd, e.code(), e.what(), kExitConfigError);
    return kExitConfigError;
  } catch (const EvolutionError& e) {
    const int code = phase == Phase::Prepare ? kExitConfigError : kExitSimulationError;
    const auto& samples = e.partial().samples;
    print_error(report, cmd, e.code(), e.what(), code,
                {{"reached_time", samples.empty() ? json(nullptr) : json(samples.back().time)}});
    return code;
  } catch (const Error& e) {
    const int code = phase == Phase::Prepare ? kExitConfigError : kExitSimulationError;
    print_error(report, cmd, e.code(), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    const int code = phase == Phase::Prepare ? kExitConfigError : kExitSimulationError;
    print_error(report, cmd, "InternalError", e.what(), code);
    return code;
  }

  std::vector<std::string> names;
  try {
    write_files(options.out_dir, result);
  } catch (const std::exception& e) {
    print_error(report, cmd, "IOError", e.what(), kExitSimulationError);
    return kExitSimulationError;
  }
  for (const auto& f : result.files) names.push_back(f.first);

  if (result.exit_code != kExitOk) {
    json extra = result.error;
    extra.erase("code");
    extra.erase("message");
    extra["summary"] = result.summary;
    print_error(report, cmd, result.error.value("code", "Error"), result.error.value("message", ""),
                result.exit_code, extra);
    return result.exit_code;
  }
  json ok = {{"status", "ok"},
             {"command", cmd},
             {"out_dir", options.out_dir},
             {"outputs", names},
             {"summary", result.summary}};
  report << ok.dump() << std::endl;
  return kExitOk;
}

}  // namespace annihilate::cli
