#include <abphase/errors.hpp>
#include <abphase/phases.hpp>
#include <abphase/scenario.hpp>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace abphase {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path.empty() ? what : path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Strict reader over one JSON object: every key must be consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }

  const json& raw(const std::string& k) {
    if (!j_.contains(k)) fail(join(path_, k), "missing");
    used_.insert(k);
    return j_.at(k);
  }

  double num(const std::string& k) {
    const auto& v = raw(k);
    if (!v.is_number()) fail(join(path_, k), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(join(path_, k), "must be finite");
    return d;
  }
  double num(const std::string& k, double def) { return has(k) ? num(k) : def; }

  int integer(const std::string& k, int def) {
    if (!has(k)) return def;
    const auto& v = raw(k);
    if (!v.is_number_integer()) fail(join(path_, k), "expected an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& k, bool def) {
    if (!has(k)) return def;
    const auto& v = raw(k);
    if (!v.is_boolean()) fail(join(path_, k), "expected true or false");
    return v.get<bool>();
  }

  std::string str(const std::string& k) {
    const auto& v = raw(k);
    if (!v.is_string()) fail(join(path_, k), "expected a string");
    return v.get<std::string>();
  }

  Vec3 vec(const std::string& k, Vec3 def) { return has(k) ? to_vec(raw(k), join(path_, k)) : def; }
  Vec3 vec(const std::string& k) { return to_vec(raw(k), join(path_, k)); }

  std::vector<Vec3> vecs(const std::string& k) {
    const auto& v = raw(k);
    if (!v.is_array()) fail(join(path_, k), "expected a list of points");
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_vec(v[i], join(path_, k) + "." + std::to_string(i)));
    return out;
  }

  std::vector<double> nums(const std::string& k) {
    const auto& v = raw(k);
    if (!v.is_array()) fail(join(path_, k), "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(join(path_, k) + "." + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  Reader child(const std::string& k) { return Reader(raw(k), join(path_, k)); }
  const std::string& path() const { return path_; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail(path_, "unknown key '" + it.key() + "'");
  }

 private:
  static Vec3 to_vec(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 3) fail(path, "expected [x, y, z]");
    for (const auto& e : v)
      if (!e.is_number()) fail(path, "expected [x, y, z]");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

// Library validation messages name the field; prefix where it sits in the file.
template <class T>
void validate_at(const T& v, const std::string& path) {
  try {
    validate(v);
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
}

CurrentSource read_source(Reader r, std::optional<double>& tpl) {
  const std::string type = r.str("type");
  CurrentSource out;
  if (type == "ideal_solenoid") {
    IdealInfiniteSolenoid s;
    s.axis_point = r.vec("axis_point", s.axis_point);
    s.axis_dir = r.vec("axis_dir", s.axis_dir);
    s.radius = r.num("radius", s.radius);
    s.flux = r.num("flux", s.flux);
    out = s;
  } else if (type == "finite_solenoid") {
    FiniteSolenoid s;
    s.center = r.vec("center", s.center);
    s.axis_dir = r.vec("axis_dir", s.axis_dir);
    s.radius = r.num("radius", s.radius);
    s.length = r.num("length", s.length);
    s.current = r.num("current", s.current);
    if (r.has("n_loops") == r.has("turns_per_length"))
      fail(r.path(), "give exactly one of 'n_loops' and 'turns_per_length'");
    if (r.has("turns_per_length")) {
      tpl = r.num("turns_per_length");
      if (!(*tpl > 0)) fail(join(r.path(), "turns_per_length"), "must be positive");
      s.n_loops = static_cast<int>(std::lround(*tpl * s.length));
    } else {
      s.n_loops = r.integer("n_loops", s.n_loops);
    }
    out = s;
  } else if (type == "toroid") {
    ToroidalCoil s;
    s.center = r.vec("center", s.center);
    s.plane_normal = r.vec("plane_normal", s.plane_normal);
    s.major_radius = r.num("major_radius", s.major_radius);
    s.minor_radius = r.num("minor_radius", s.minor_radius);
    s.n_turns = r.integer("n_turns", s.n_turns);
    s.current = r.num("current", s.current);
    out = s;
  } else if (type == "loop") {
    CurrentLoop s;
    s.center = r.vec("center", s.center);
    s.normal = r.vec("normal", s.normal);
    s.radius = r.num("radius", s.radius);
    s.current = r.num("current", s.current);
    out = s;
  } else if (type == "polyline") {
    PolylineCurrent s;
    s.vertices = r.vecs("vertices");
    s.current = r.num("current", s.current);
    s.closed = r.boolean("closed", s.closed);
    out = s;
  } else {
    fail(join(r.path(), "type"),
         "unknown source type '" + type + "' (ideal_solenoid, finite_solenoid, toroid, loop, polyline)");
  }
  r.finish();
  validate_at(out, r.path());
  return out;
}

json write_source(const CurrentSource& src, const std::optional<double>& tpl) {
  json j;
  if (const auto* s = std::get_if<IdealInfiniteSolenoid>(&src)) {
    j["type"] = "ideal_solenoid";
    j["axis_point"] = vec_json(s->axis_point);
    j["axis_dir"] = vec_json(s->axis_dir);
    j["radius"] = s->radius;
    j["flux"] = s->flux;
  } else if (const auto* s = std::get_if<FiniteSolenoid>(&src)) {
    j["type"] = "finite_solenoid";
    j["center"] = vec_json(s->center);
    j["axis_dir"] = vec_json(s->axis_dir);
    j["radius"] = s->radius;
    j["length"] = s->length;
    if (tpl)
      j["turns_per_length"] = *tpl;
    else
      j["n_loops"] = s->n_loops;
    j["current"] = s->current;
  } else if (const auto* s = std::get_if<ToroidalCoil>(&src)) {
    j["type"] = "toroid";
    j["center"] = vec_json(s->center);
    j["plane_normal"] = vec_json(s->plane_normal);
    j["major_radius"] = s->major_radius;
    j["minor_radius"] = s->minor_radius;
    j["n_turns"] = s->n_turns;
    j["current"] = s->current;
  } else if (const auto* s = std::get_if<CurrentLoop>(&src)) {
    j["type"] = "loop";
    j["center"] = vec_json(s->center);
    j["normal"] = vec_json(s->normal);
    j["radius"] = s->radius;
    j["current"] = s->current;
  } else {
    const auto& p = std::get<PolylineCurrent>(src);
    j["type"] = "polyline";
    j["vertices"] = json::array();
    for (const auto& v : p.vertices) j["vertices"].push_back(vec_json(v));
    j["current"] = p.current;
    j["closed"] = p.closed;
  }
  return j;
}

ChargeTrajectory read_trajectory(Reader r) {
  ChargeTrajectory tr;
  const std::string type = r.str("type");
  tr.charge = r.num("charge", tr.charge);
  if (type == "circle") {
    CircularOrbit o;
    o.center = r.vec("center", o.center);
    o.normal = r.vec("normal", o.normal);
    o.radius = r.num("radius", o.radius);
    o.period = r.num("period", o.period);
    o.windings = r.integer("windings", o.windings);
    tr.path = o;
  } else if (type == "polygon") {
    PiecewiseLinearLoop p;
    p.vertices = r.vecs("vertices");
    if (r.has("durations")) {
      p.durations = r.nums("durations");
    } else {
      const double period = r.num("period", 1.0);
      p.durations.assign(p.vertices.size(), period / static_cast<double>(std::max<std::size_t>(1, p.vertices.size())));
    }
    tr.path = p;
  } else {
    fail(join(r.path(), "type"), "unknown trajectory type '" + type + "' (circle, polygon)");
  }
  r.finish();
  validate_at(tr, r.path());
  return tr;
}

json write_trajectory(const ChargeTrajectory& tr) {
  json j;
  if (const auto* o = std::get_if<CircularOrbit>(&tr.path)) {
    j["type"] = "circle";
    j["charge"] = tr.charge;
    j["center"] = vec_json(o->center);
    j["normal"] = vec_json(o->normal);
    j["radius"] = o->radius;
    j["period"] = o->period;
    j["windings"] = o->windings;
  } else {
    const auto& p = std::get<PiecewiseLinearLoop>(tr.path);
    j["type"] = "polygon";
    j["charge"] = tr.charge;
    j["vertices"] = json::array();
    for (const auto& v : p.vertices) j["vertices"].push_back(vec_json(v));
    j["durations"] = p.durations;
  }
  return j;
}

PointCharge read_point_charge(Reader r) {
  PointCharge c;
  c.charge = r.num("charge", c.charge);
  c.position = r.vec("position");
  r.finish();
  return c;
}

QuadratureSpec read_quadrature(Reader r) {
  QuadratureSpec q;
  q.rel_tol = r.num("rel_tol", q.rel_tol);
  q.abs_tol = r.num("abs_tol", q.abs_tol);
  q.max_subdivisions = r.integer("max_subdivisions", static_cast<int>(q.max_subdivisions));
  q.truncation_radius = r.num("truncation_radius", q.truncation_radius);
  q.exclusion_radius = r.num("exclusion_radius", q.exclusion_radius);
  q.richardson = r.boolean("richardson", q.richardson);
  q.field_rel_tol = r.num("field_rel_tol", q.field_rel_tol);
  q.closure_tol = r.num("closure_tol", q.closure_tol);
  q.max_arclength = r.num("max_arclength", q.max_arclength);
  q.seed_grid = r.integer("seed_grid", q.seed_grid);
  q.max_unclassified_fraction = r.num("max_unclassified_fraction", q.max_unclassified_fraction);
  q.threads = r.integer("threads", q.threads);
  r.finish();
  try {
    validate(q);
  } catch (const ValidationError& e) {
    fail(r.path(), e.what());
  }
  return q;
}

json write_quadrature(const QuadratureSpec& q) {
  json j;
  j["rel_tol"] = q.rel_tol;
  j["abs_tol"] = q.abs_tol;
  j["max_subdivisions"] = q.max_subdivisions;
  j["truncation_radius"] = q.truncation_radius;
  j["exclusion_radius"] = q.exclusion_radius;
  j["richardson"] = q.richardson;
  j["field_rel_tol"] = q.field_rel_tol;
  j["closure_tol"] = q.closure_tol;
  j["max_arclength"] = q.max_arclength;
  j["seed_grid"] = q.seed_grid;
  j["max_unclassified_fraction"] = q.max_unclassified_fraction;
  j["threads"] = q.threads;
  return j;
}

// Method/geometry compatibility, checked up front so a run never starts doomed.
void check_method(const ScenarioConfig& c, const std::string& m) {
  const auto allowed = method_selectors(c.kind);
  if (std::find(allowed.begin(), allowed.end(), m) == allowed.end()) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    fail("methods", "'" + m + "' is not available for " + std::string(to_string(c.kind)) + " scenarios (" + list + ")");
  }
  if (c.kind != ScenarioKind::Magnetic) return;
  const auto& src = *c.source;
  if (m == "axis-reduction" &&
      !(std::holds_alternative<IdealInfiniteSolenoid>(src) && std::holds_alternative<CircularOrbit>(c.trajectory->path)))
    fail("methods", "axis-reduction needs an ideal_solenoid source and a circle trajectory");
  if (m == "ampere-reduction" && !std::holds_alternative<ToroidalCoil>(src))
    fail("methods", "ampere-reduction needs a toroid source");
  if (m == "overlap" && (std::holds_alternative<CurrentLoop>(src) || std::holds_alternative<PolylineCurrent>(src)))
    fail("methods", "overlap needs a source with a bounded field region (solenoid or toroid)");
  if (m == "shell-linking" &&
      (std::holds_alternative<IdealInfiniteSolenoid>(src) || std::holds_alternative<PolylineCurrent>(src)))
    fail("methods", "shell-linking needs a finite_solenoid, toroid or loop source");
}

ScenarioConfig from_json(const json& doc) {
  Reader r(doc, "");
  ScenarioConfig c;
  c.name = r.str("name");
  if (c.name.empty()) fail("name", "must not be empty");
  const std::string kind = r.str("kind");
  if (kind == "magnetic")
    c.kind = ScenarioKind::Magnetic;
  else if (kind == "electric")
    c.kind = ScenarioKind::Electric;
  else if (kind == "energy-identity")
    c.kind = ScenarioKind::EnergyIdentity;
  else
    fail("kind", "expected magnetic, electric or energy-identity, got '" + kind + "'");
  if (r.has("units")) {
    try {
      c.units = unit_system_from_string(r.str("units"));
    } catch (const ValidationError& e) {
      fail("", e.what());
    }
  }

  auto forbid = [&](const char* key) {
    if (r.has(key)) fail(key, "not used by " + kind + " scenarios");
  };
  if (c.kind == ScenarioKind::Magnetic) {
    c.source = read_source(r.child("source"), c.turns_per_length);
    c.trajectory = read_trajectory(r.child("trajectory"));
    forbid("charges");
    forbid("pair");
  } else if (c.kind == ScenarioKind::Electric) {
    Reader ch = r.child("charges");
    const std::string type = ch.str("type");
    if (type == "symmetric_pair") {
      PairSpec p;
      p.q = ch.num("q", p.q);
      p.big_q = ch.num("Q", p.big_q);
      p.separation = ch.num("separation", p.separation);
      p.dwell_time = ch.num("dwell_time", p.dwell_time);
      c.pair_spec = p;
      c.charges = vaidman_pair(p.q, p.big_q, p.separation, p.dwell_time);
    } else if (type == "explicit") {
      StaticChargeConfig s;
      const auto& ext = ch.raw("external");
      if (!ext.is_array()) fail("charges.external", "expected a list");
      for (std::size_t i = 0; i < ext.size(); ++i)
        s.external.push_back(read_point_charge(Reader(ext[i], "charges.external." + std::to_string(i))));
      s.test = read_point_charge(ch.child("test"));
      s.dwell_time = ch.num("dwell_time", s.dwell_time);
      c.charges = s;
    } else {
      fail("charges.type", "expected symmetric_pair or explicit, got '" + type + "'");
    }
    ch.finish();
    validate_at(*c.charges, "charges");
    forbid("source");
    forbid("trajectory");
    forbid("pair");
  } else {
    Reader p = r.child("pair");
    ChargePair cp;
    cp.q1 = p.num("q1", cp.q1);
    cp.x1 = p.vec("x1", cp.x1);
    cp.q2 = p.num("q2", cp.q2);
    cp.x2 = p.vec("x2", cp.x2);
    p.finish();
    if (!(norm(cp.x1 - cp.x2) > 0)) fail("pair", "the two charges coincide");
    c.pair = cp;
    forbid("source");
    forbid("trajectory");
    forbid("charges");
  }

  const auto& methods = r.raw("methods");
  if (!methods.is_array() || methods.empty()) fail("methods", "expected a non-empty list of method names");
  for (const auto& m : methods) {
    if (!m.is_string()) fail("methods", "expected method names");
    c.methods.push_back(m.get<std::string>());
  }
  for (const auto& m : c.methods) check_method(c, m);

  if (r.has("quadrature")) c.quadrature = read_quadrature(r.child("quadrature"));
  if (r.has("sweep")) {
    Reader s = r.child("sweep");
    SweepSpec sw;
    sw.parameter = s.str("parameter");
    sw.values = s.nums("values");
    s.finish();
    if (sw.values.empty()) fail("sweep.values", "empty sweep");
    c.sweep = sw;
  }
  r.finish();
  return c;
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["kind"] = std::string(to_string(c.kind));
  j["units"] = std::string(to_string(c.units));
  if (c.source) j["source"] = write_source(*c.source, c.turns_per_length);
  if (c.trajectory) j["trajectory"] = write_trajectory(*c.trajectory);
  if (c.pair_spec) {
    j["charges"] = {{"type", "symmetric_pair"},
                    {"q", c.pair_spec->q},
                    {"Q", c.pair_spec->big_q},
                    {"separation", c.pair_spec->separation},
                    {"dwell_time", c.pair_spec->dwell_time}};
  } else if (c.charges) {
    json ext = json::array();
    for (const auto& e : c.charges->external) ext.push_back({{"charge", e.charge}, {"position", vec_json(e.position)}});
    j["charges"] = {{"type", "explicit"},
                    {"external", ext},
                    {"test", {{"charge", c.charges->test.charge}, {"position", vec_json(c.charges->test.position)}}},
                    {"dwell_time", c.charges->dwell_time}};
  }
  if (c.pair)
    j["pair"] = {{"q1", c.pair->q1}, {"x1", vec_json(c.pair->x1)}, {"q2", c.pair->q2}, {"x2", vec_json(c.pair->x2)}};
  j["methods"] = c.methods;
  j["quadrature"] = write_quadrature(c.quadrature);
  if (c.sweep) j["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
  return j;
}

std::pair<int, int> line_col(std::string_view text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Magnetic: return "magnetic";
    case ScenarioKind::Electric: return "electric";
    case ScenarioKind::EnergyIdentity: return "energy-identity";
  }
  return "?";
}

std::vector<std::string> method_selectors(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Magnetic:
      return {"wilson", "flux", "overlap", "axis-reduction", "ampere-reduction", "shell-linking"};
    case ScenarioKind::Electric: return {"electric-potential", "electric-overlap"};
    case ScenarioKind::EnergyIdentity: return {"coulomb-energy"};
  }
  return {};
}

ScenarioConfig parse_scenario(std::string_view text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    const auto pos = msg.find(": ");
    throw ValidationError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": syntax error: " + (pos == std::string::npos ? msg : msg.substr(pos + 2)));
  }
  try {
    ScenarioConfig c = from_json(doc);
    if (c.sweep) with_parameter(c, c.sweep->parameter, c.sweep->values.front());
    return c;
  } catch (const ValidationError& e) {
    throw ValidationError(origin + ": " + e.what());
  }
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

std::string serialize_scenario(const ScenarioConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

ScenarioConfig with_parameter(const ScenarioConfig& cfg, const std::string& path, double value) {
  json doc = to_json(cfg);
  json* node = &doc;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (node->is_object() && node->contains(part)) {
      node = &(*node)[part];
    } else if (node->is_array() && !part.empty() && std::all_of(part.begin(), part.end(), ::isdigit) &&
               std::stoul(part) < node->size()) {
      node = &(*node)[std::stoul(part)];
    } else {
      fail("sweep.parameter", "'" + path + "' does not name a field of this scenario");
    }
  }
  if (!node->is_number()) fail("sweep.parameter", "'" + path + "' is not a numeric field");
  if (node->is_number_integer()) {
    if (value != std::floor(value)) fail("sweep.parameter", "'" + path + "' takes integer values");
    *node = static_cast<long long>(value);
  } else {
    *node = value;
  }
  return from_json(doc);
}

bool RunReport::all_converged() const {
  return std::all_of(runs.begin(), runs.end(), [](const MethodRun& r) { return r.ok(); });
}

bool SweepReport::all_converged() const {
  return std::all_of(errors.begin(), errors.end(), [](const std::string& e) { return e.empty(); }) &&
         std::all_of(runs.begin(), runs.end(), [](const RunReport& r) { return r.all_converged(); });
}

RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opt) {
  const PhysicalConstants k = PhysicalConstants::for_units(cfg.units);
  const QuadratureSpec& spec = cfg.quadrature;
  RunReport rep;
  rep.scenario = cfg.name;
  rep.kind = cfg.kind;

  auto timed = [&](const std::string& name, auto&& fn) {
    MethodRun run;
    run.method = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run.result = fn();
    } catch (const Error& e) {
      run.error = e.what();
    }
    run.wall_ms = elapsed_ms(t0);
    run.normalized = rep.reference != 0 ? run.result.phase / rep.reference : 0.0;
    rep.runs.push_back(std::move(run));
  };

  if (cfg.kind == ScenarioKind::Magnetic) {
    const MagneticScenario s{*cfg.source, *cfg.trajectory, k};
    try {
      rep.reference = s.trajectory.charge * reference_flux(s, spec) / k.hbar;
    } catch (const Error&) {
      rep.reference = 0;
    }
    for (const auto& m : cfg.methods) {
      timed(m, [&]() -> PhaseResult {
        if (m == "wilson") return wilson_loop_phase(s, spec);
        if (m == "flux") return flux_phase(s, spec);
        if (m == "overlap") return field_overlap_phase(s, spec, opt.diagnostics);
        if (m == "axis-reduction") return solenoid_axis_reduction_phase(s, spec);
        if (m == "ampere-reduction") return ampere_reduction_phase(s, spec);
        return shell_linking_phase(s, spec);
      });
    }
  } else if (cfg.kind == ScenarioKind::Electric) {
    const ElectricScenario s{*cfg.charges, k};
    rep.reference = electric_potential_phase(s).phase;
    for (const auto& m : cfg.methods) {
      timed(m, [&]() -> PhaseResult {
        if (m == "electric-potential") return electric_potential_phase(s);
        return electric_field_overlap_phase(s, spec);
      });
    }
  } else {
    const auto& p = *cfg.pair;
    rep.reference = p.q1 * p.q2 / (4 * kPi * k.eps0 * norm(p.x1 - p.x2));
    // One cubature yields both forms; the second row reuses it.
    CoulombEnergy e;
    std::string err;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      e = coulomb_cross_energy(p.q1, p.x1, p.q2, p.x2, k, spec);
    } catch (const Error& ex) {
      err = ex.what();
    }
    const double ms = elapsed_ms(t0);
    for (const auto& [label, value] : {std::pair{"energy-product", e.product_form},
                                       std::pair{"energy-subtracted", e.subtracted_form}}) {
      MethodRun run;
      run.method = label;
      run.error = err;
      run.result.phase = value;
      run.result.abs_error_estimate = e.error;
      run.result.n_evaluations = e.n_evals;
      run.result.converged = e.converged;
      run.result.diagnostics["tail"] = e.tail;
      run.result.diagnostics["analytic"] = e.analytic;
      run.wall_ms = ms;
      run.normalized = rep.reference != 0 ? value / rep.reference : 0.0;
      rep.runs.push_back(std::move(run));
    }
  }

  for (std::size_t i = 0; i < rep.runs.size(); ++i)
    for (std::size_t j = i + 1; j < rep.runs.size(); ++j) {
      const auto &a = rep.runs[i], &b = rep.runs[j];
      if (!a.error.empty() || !b.error.empty()) continue;
      rep.deviations.push_back({a.method, b.method, std::abs(a.normalized - b.normalized)});
    }
  return rep;
}

SweepReport run_sweep(const ScenarioConfig& cfg, const RunOptions& opt) {
  if (!cfg.sweep) throw ValidationError(cfg.name + ": no sweep defined");
  if (cfg.sweep->values.empty()) throw ValidationError(cfg.name + ": sweep.values: empty sweep");
  SweepReport rep;
  rep.scenario = cfg.name;
  rep.parameter = cfg.sweep->parameter;
  rep.values = cfg.sweep->values;
  for (double v : rep.values) {
    try {
      rep.runs.push_back(run_scenario(with_parameter(cfg, rep.parameter, v), opt));
      rep.errors.emplace_back();
    } catch (const Error& e) {
      RunReport failed;
      failed.scenario = cfg.name;
      failed.kind = cfg.kind;
      for (const auto& m : cfg.methods) {
        MethodRun run;
        run.method = m;
        run.error = e.what();
        failed.runs.push_back(run);
      }
      rep.runs.push_back(failed);
      rep.errors.emplace_back(e.what());
    }
  }

  // Row labels rather than selectors: one selector can produce several rows.
  std::vector<std::string> labels;
  for (const auto& run : rep.runs)
    for (const auto& r : run.runs)
      if (std::find(labels.begin(), labels.end(), r.method) == labels.end()) labels.push_back(r.method);
  for (const auto& m : labels) {
    std::vector<double> dev, err;
    for (std::size_t i = 0; i < rep.runs.size(); ++i)
      for (const auto& r : rep.runs[i].runs)
        if (r.method == m && r.error.empty()) {
          dev.push_back(std::abs(r.normalized - 1.0));
          err.push_back(r.result.abs_error_estimate);
        }
    if (dev.size() != rep.values.size()) {
      rep.monotonicity.push_back(m + ": incomplete series");
      continue;
    }
    auto decreasing = [](const std::vector<double>& s) {
      for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] > s[i - 1]) return false;
      return true;
    };
    std::ostringstream os;
    os.precision(3);
    os << m << ": |normalized - 1| " << (decreasing(dev) ? "decreasing" : "NOT decreasing") << " (" << dev.front()
       << " -> " << dev.back() << "), error estimate " << (decreasing(err) ? "decreasing" : "NOT decreasing") << " ("
       << err.front() << " -> " << err.back() << ")";
    rep.monotonicity.push_back(os.str());
  }
  return rep;
}

}  // namespace abphase
