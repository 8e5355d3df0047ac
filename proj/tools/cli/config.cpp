#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "annihilate/errors.hpp"

namespace annihilate::cli {

namespace {

using nlohmann::json;

// Reads the keys of one JSON object and rejects the ones nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& child(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void number(const char* key, double& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) fail(key, "must be finite");
  }

  void count(const char* key, std::size_t& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) fail(key, "expected a non-negative integer");
    out = v.get<std::size_t>();
  }

  void integer(const char* key, int& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    out = v.get<int>();
  }

  void boolean(const char* key, bool& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(key, "expected a boolean");
    out = v.get<bool>();
  }

  void string(const char* key, std::string& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    out = v.get<std::string>();
  }

  void numbers(const char* key, std::vector<double>& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number()) fail(key, "expected an array of numbers");
      out.push_back(e.get<double>());
      if (!std::isfinite(out.back())) fail(key, "entries must be finite");
    }
  }

  void counts(const char* key, std::vector<std::size_t>& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(key, "expected an array of non-negative integers");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number_unsigned()) fail(key, "expected an array of non-negative integers");
      out.push_back(e.get<std::size_t>());
    }
  }

  void charges(const char* key, std::vector<int>& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(key, "expected an array of charges");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number_integer()) fail(key, "charges must be -1, 0 or 1");
      const auto b = e.get<long long>();
      if (b < -1 || b > 1) fail(key, "charges must be -1, 0 or 1");
      out.push_back(static_cast<int>(b));
    }
  }

  // Call after all reads.
  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError(path_ + ": unknown key '" + item.key() + "'");
  }

  [[noreturn]] void fail(const char* key, const std::string& what) const {
    throw ConfigError(path_ + "." + key + ": " + what);
  }

 private:
  bool take(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void read_integrator(const json& j, const std::string& path, IntegratorConfig& c,
                     std::size_t* samples) {
  Section s(j, path);
  s.number("abs_tol", c.abs_tol);
  s.number("rel_tol", c.rel_tol);
  s.number("cluster_gap", c.cluster_gap);
  if (s.has("max_step")) s.number("max_step", c.max_step);
  s.number("t_end", c.t_end);
  s.number("collision_safety", c.collision_safety);
  s.numbers("sample_times", c.sample_times);
  s.boolean("record_steps", c.record_steps);
  s.count("max_steps", c.max_steps);
  if (samples) s.count("samples", *samples);
  s.finish();

  require(c.abs_tol > 0.0 && c.rel_tol >= 0.0, path + ": tolerances must be positive");
  require(c.max_step > 0.0, path + ".max_step must be positive");
  require(c.t_end >= 0.0, path + ".t_end must be non-negative");
  require(c.collision_safety > 0.0 && c.collision_safety <= 1.0,
          path + ".collision_safety must lie in (0, 1]");
  require(c.max_steps > 0, path + ".max_steps must be positive");
}

void read_scheme(const json& j, const std::string& path, SchemeConfig& c) {
  Section s(j, path);
  s.number("L", c.L);
  s.number("h", c.h);
  s.integer("rho_cells", c.rho_cells);
  s.number("cfl", c.cfl);
  s.number("t_end", c.t_end);
  s.numbers("snapshot_times", c.snapshot_times);
  s.finish();

  require(c.L > 0.0, path + ".L must be positive");
  require(c.h > 0.0 && c.h < c.L, path + ".h must lie in (0, L)");
  require(c.rho_cells >= 1, path + ".rho_cells must be at least 1");
  require(c.cfl > 0.0 && c.cfl <= 1.0, path + ".cfl must lie in (0, 1]");
  require(c.t_end >= 0.0, path + ".t_end must be non-negative");
  require(c.L / c.h <= 1e6, path + ": grid too large");
}

void check_datum(const std::string& id, const std::string& path) {
  for (const auto& known : catalog_ids())
    if (known == id) return;
  throw ConfigError(path + ": unknown datum '" + id + "'");
}

void read_experiment(const json& j, ExperimentSpec& e) {
  Section s(j, "experiment");
  std::string datum = e.datum;
  s.string("datum", datum);
  check_datum(datum, "experiment.datum");
  e = default_experiment(datum);
  s.counts("ladder", e.ladder);
  s.number("a", e.a);
  s.number("t_end", e.t_end);
  s.count("snapshots", e.snapshots);
  s.count("scan_points", e.scan_points);
  s.number("slack", e.slack);
  s.integer("margin_cells", e.margin_cells);
  if (s.has("scheme")) read_scheme(s.child("scheme"), "experiment.scheme", e.scheme);
  if (s.has("integrator"))
    read_integrator(s.child("integrator"), "experiment.integrator", e.integrator, nullptr);
  s.finish();

  require(!e.ladder.empty(), "experiment.ladder must not be empty");
  for (auto n : e.ladder) require(n >= 1, "experiment.ladder entries must be positive");
  require(e.a >= 0.0 && e.a < 1.0, "experiment.a must lie in [0, 1)");
  require(e.t_end > 0.0, "experiment.t_end must be positive");
  require(e.snapshots >= 1, "experiment.snapshots must be positive");
  require(e.scan_points >= 2, "experiment.scan_points must be at least 2");
  require(e.slack >= 1.0, "experiment.slack must be at least 1");
  require(e.margin_cells >= 0, "experiment.margin_cells must be non-negative");
}

void read_initial(const json& j, InitialSection& in) {
  Section s(j, "initial");
  in.present = true;
  s.numbers("positions", in.positions);
  s.charges("charges", in.charges);
  if (s.has("coupling")) {
    double g = 0.0;
    s.number("coupling", g);
    require(g > 0.0, "initial.coupling must be positive");
    in.coupling = g;
  }
  s.number("time", in.time);
  s.finish();
  require(in.positions.size() == in.charges.size(),
          "initial: positions and charges differ in length");
}

void read_hj(const json& j, HjSection& h) {
  Section s(j, "hj");
  s.string("datum", h.datum);
  s.number("eps", h.eps);
  s.finish();
  check_datum(h.datum, "hj.datum");
  require(h.eps > 0.0, "hj.eps must be positive");
}

void read_verify(const json& j, VerifySection& v) {
  Section s(j, "verify");
  s.counts("sizes", v.sizes);
  s.count("runs", v.runs);
  s.count("uniform_samples", v.uniform_samples);
  s.number("stencil", v.stencil);
  s.finish();
  require(!v.sizes.empty(), "verify.sizes must not be empty");
  for (auto n : v.sizes) require(n >= 2 && n <= 4096, "verify.sizes entries must lie in [2, 4096]");
  require(v.uniform_samples >= 2, "verify.uniform_samples must be at least 2");
  require(v.stencil > 0.0 && v.stencil < 0.1, "verify.stencil must lie in (0, 0.1)");
}

void read_measure(const json& j, MeasureSection& m) {
  Section s(j, "measure");
  s.string("family", m.family);
  s.string("datum", m.datum);
  s.counts("ladder", m.ladder);
  s.number("a", m.a);
  s.number("lo", m.lo);
  s.number("hi", m.hi);
  s.integer("levels", m.levels);
  s.number("omega_lipschitz", m.omega_lipschitz);
  s.number("threshold", m.threshold);
  s.finish();
  require(m.family == "dirac_pair" || m.family == "sampled",
          "measure.family must be 'dirac_pair' or 'sampled'");
  check_datum(m.datum, "measure.datum");
  require(!m.ladder.empty(), "measure.ladder must not be empty");
  for (auto n : m.ladder) require(n >= 1, "measure.ladder entries must be positive");
  require(m.a >= 0.0 && m.a < 1.0, "measure.a must lie in [0, 1)");
  require(m.lo < m.hi, "measure.lo must be below measure.hi");
  require(m.levels >= 0 && m.levels <= 16, "measure.levels must lie in [0, 16]");
  require(m.omega_lipschitz >= 0.0, "measure.omega_lipschitz must be non-negative");
  require(m.threshold >= 0.0, "measure.threshold must be non-negative");
}

void read_moments(const json& j, std::vector<double>& positions) {
  Section s(j, "moments");
  s.numbers("positions", positions);
  s.finish();
}

}  // namespace

std::string config_hash(const json& j) {
  const std::string text = j.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw ConfigError("SHA-256 unavailable");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < 8 && i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

Config parse_config(const json& j) {
  Config c;
  c.raw = j;
  c.hash = config_hash(j);
  c.experiment = default_experiment(c.experiment.datum);

  Section s(j, "config");
  if (s.has("integrator")) read_integrator(s.child("integrator"), "integrator", c.integrator, &c.samples);
  if (s.has("scheme")) read_scheme(s.child("scheme"), "scheme", c.scheme);
  if (s.has("experiment")) read_experiment(s.child("experiment"), c.experiment);
  if (s.has("initial")) read_initial(s.child("initial"), c.initial);
  if (s.has("hj")) read_hj(s.child("hj"), c.hj);
  if (s.has("verify")) read_verify(s.child("verify"), c.verify);
  if (s.has("measure")) read_measure(s.child("measure"), c.measure);
  if (s.has("moments")) read_moments(s.child("moments"), c.moment_positions);
  s.finish();
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

}  // namespace annihilate::cli
