#include <abphase/errors.hpp>
#include <abphase/phases.hpp>
#include <abphase/support_field.hpp>
#include <abphase/topology.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace abphase {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Natural flux scale of a source, used for absolute tolerances.
double flux_scale(const CurrentSource& src, const PhysicalConstants& k) {
  if (const auto* s = std::get_if<IdealInfiniteSolenoid>(&src)) return std::abs(s->flux);
  if (const auto* s = std::get_if<FiniteSolenoid>(&src)) return std::abs(solenoid_core_flux(*s, k));
  if (const auto* t = std::get_if<ToroidalCoil>(&src)) return std::abs(toroid_flux(*t, k));
  if (const auto* l = std::get_if<CurrentLoop>(&src)) return std::abs(k.mu0 * l->current * l->radius);
  const auto& p = std::get<PolylineCurrent>(src);
  return std::abs(k.mu0 * p.current * characteristic_size(src));
}

// Time breakpoints, with circles cut into eighth turns.
std::vector<double> time_cuts(const ChargeTrajectory& tr) {
  if (const auto* o = std::get_if<CircularOrbit>(&tr.path)) {
    const int pieces = std::max(1, 8 * std::abs(o->windings));
    std::vector<double> t;
    for (int i = 0; i <= pieces; ++i) t.push_back(o->period * i / pieces);
    return t;
  }
  return trajectory_breakpoints(tr);
}

std::vector<Vec3> dense_samples(const ChargeTrajectory& tr, int per_piece = 128) {
  const auto cuts = time_cuts(tr);
  std::vector<Vec3> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    for (int j = 0; j < per_piece; ++j)
      out.push_back(trajectory_sample(tr, cuts[i] + (cuts[i + 1] - cuts[i]) * j / per_piece).position);
  return out;
}

double path_length(const ChargeTrajectory& tr) {
  if (const auto* o = std::get_if<CircularOrbit>(&tr.path)) return 2 * kPi * o->radius * std::abs(o->windings);
  const auto& p = std::get<PiecewiseLinearLoop>(tr.path);
  double l = 0;
  for (std::size_t i = 0; i < p.vertices.size(); ++i) l += norm(p.vertices[(i + 1) % p.vertices.size()] - p.vertices[i]);
  return l;
}

bool stationary(const ChargeTrajectory& tr) {
  const auto* o = std::get_if<CircularOrbit>(&tr.path);
  return o && o->windings == 0;
}

// Euclidean distance from x to the field support (negative inside).
double support_distance(const CurrentSource& src, const Vec3& x) {
  auto axial = [](const Vec3& d, const Vec3& axis, double& z) {
    z = dot(d, axis);
    return norm(d - z * axis);
  };
  double z = 0;
  if (const auto* s = std::get_if<IdealInfiniteSolenoid>(&src)) return axial(x - s->axis_point, s->axis_dir, z) - s->radius;
  if (const auto* s = std::get_if<FiniteSolenoid>(&src)) {
    const double dr = axial(x - s->center, s->axis_dir, z) - s->radius;
    const double dz = std::abs(z) - 0.5 * s->length;
    if (dr > 0 && dz > 0) return std::hypot(dr, dz);
    return std::max(dr, dz);
  }
  if (const auto* t = std::get_if<ToroidalCoil>(&src)) {
    const double rho = axial(x - t->center, t->plane_normal, z);
    return std::hypot(rho - t->major_radius, z) - t->minor_radius;
  }
  return kInf;
}

PhaseResult zero_result(PhaseMethod m, std::string note) {
  PhaseResult r;
  r.method = m;
  r.converged = true;
  r.note = std::move(note);
  return r;
}

// Distance between segments [p0, p1] and [q0, q1].
double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  const Vec3 d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
  const double a = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);
  double sa = 0, tb = 0;
  if (a <= 1e-300 && e <= 1e-300) return norm(r);
  if (a <= 1e-300) {
    tb = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = dot(d1, r);
    if (e <= 1e-300) {
      sa = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = dot(d1, d2), den = a * e - b * b;
      sa = den > 0 ? std::clamp((b * f - c * e) / den, 0.0, 1.0) : 0.0;
      tb = (b * sa + f) / e;
      if (tb < 0) {
        tb = 0;
        sa = std::clamp(-c / a, 0.0, 1.0);
      } else if (tb > 1) {
        tb = 1;
        sa = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return norm(p0 + sa * d1 - (q0 + tb * d2));
}

struct Charge {
  double q;
  Vec3 x;
};

// Exterior part eps0 int_{|x - c| > R} E_a . E_b for two point charges inside the ball,
// from the multipole expansion of both potentials.
double exterior_pair_energy(const Charge& a, const Charge& b, const Vec3& c, double big_r, const PhysicalConstants& k) {
  const Vec3 ra = a.x - c, rb = b.x - c;
  const double na = norm(ra), nb = norm(rb);
  const double cg = (na > 0 && nb > 0) ? std::clamp(dot(ra, rb) / (na * nb), -1.0, 1.0) : 1.0;
  const double ratio = na * nb / (big_r * big_r);
  double p0 = 1, p1 = cg, pw = 1, sum = 0;
  for (int l = 0; l < 400; ++l) {
    const double pl = l == 0 ? p0 : p1;
    const double term = (l + 1.0) / (2 * l + 1.0) * pw * pl;
    sum += term;
    if (l > 0 && pw < 1e-18) break;
    if (l > 0) {
      const double p2 = ((2 * l + 1) * cg * p1 - l * p0) / (l + 1);
      p0 = p1;
      p1 = p2;
    }
    pw *= ratio;
  }
  return a.q * b.q / (4 * kPi * k.eps0 * big_r) * sum;
}

struct CrossEnergy {
  double product = 0, subtracted = 0, tail = 0, error = 0;
  std::int64_t evals = 0;
  bool converged = true;
};

// eps0 int E_A . E_B over all space for two groups of point charges.
CrossEnergy cross_energy(const std::vector<Charge>& ga, const std::vector<Charge>& gb, const PhysicalConstants& k,
                         const QuadratureSpec& spec) {
  std::vector<Vec3> pts;
  Vec3 cen{};
  for (const auto* g : {&ga, &gb})
    for (const auto& c : *g) {
      pts.push_back(c.x);
      cen += c.x;
    }
  cen = cen / static_cast<double>(pts.size());
  double extent = 0, dmin = kInf, scale = 0;
  for (const auto& p : pts) extent = std::max(extent, norm(p - cen));
  for (const auto& a : ga)
    for (const auto& b : gb) {
      const double d = norm(a.x - b.x);
      if (!(d > 0)) throw ValidationError("coulomb energy: charges coincide");
      dmin = std::min(dmin, d);
      scale += std::abs(a.q * b.q) / (4 * kPi * k.eps0 * d);
    }
  CrossEnergy out;
  if (scale == 0) return out;
  const double big_r = spec.truncation_radius > 0 ? spec.truncation_radius : 50 * std::max(extent, dmin);
  for (const auto& p : pts)
    if (norm(p - cen) >= big_r) throw ValidationError("coulomb energy: truncation_radius does not contain the charges");

  auto field = [&](const std::vector<Charge>& g, const Vec3& x) {
    Vec3 e{};
    for (const auto& c : g) e += coulomb_field(c.q, c.x, x, k);
    return e;
  };
  FieldIntegrand f = [&](const Vec3& x, std::span<double> o) {
    const Vec3 e1 = field(ga, x), e2 = field(gb, x);
    const Vec3 e = e1 + e2;
    o[0] = k.eps0 * dot(e1, e2);
    o[1] = 0.5 * k.eps0 * (dot(e, e) - dot(e1, e1) - dot(e2, e2));
  };
  QuadratureSpec q = spec;
  q.abs_tol = spec.abs_tol * scale;
  const auto est = integrate_3d(f, 2, BallDomain{cen, big_r, pts}, q);
  for (const auto& a : ga)
    for (const auto& b : gb) out.tail += exterior_pair_energy(a, b, cen, big_r, k);
  out.product = est.value[0] + out.tail;
  out.subtracted = est.value[1] + out.tail;
  out.error = std::max(est.error[0], est.error[1]);
  out.evals = est.n_evals;
  out.converged = est.converged;
  return out;
}

}  // namespace

double reference_flux(const MagneticScenario& s, const QuadratureSpec& spec) {
  if (const auto* p = std::get_if<IdealInfiniteSolenoid>(&s.source)) return p->flux;
  if (const auto* p = std::get_if<FiniteSolenoid>(&s.source)) return solenoid_core_flux(*p, s.constants);
  if (const auto* p = std::get_if<ToroidalCoil>(&s.source)) return toroid_flux(*p, s.constants);
  return flux_through_loop(s.source, s.trajectory, s.constants, spec).value;
}

PhaseResult wilson_loop_phase(const MagneticScenario& s, const QuadratureSpec& spec,
                              const std::optional<GaugeFunction>& gauge) {
  validate(spec);
  validate(s.source);
  validate(s.trajectory);
  const double scale = flux_scale(s.source, s.constants);
  if (scale == 0 || s.trajectory.charge == 0 || stationary(s.trajectory))
    return zero_result(PhaseMethod::WilsonLoop, "trivially zero");

  const FieldEvaluator field(s.source, s.constants, {spec.field_rel_tol, 0.0});
  const double excl = field.exclusion_radius();
  for (const auto& p : dense_samples(s.trajectory, 32))
    if (field.filament_distance(p) <= excl)
      throw GeometryError("wilson_loop_phase: trajectory runs through a current filament");

  auto f = [&](double t) {
    const auto smp = trajectory_sample(s.trajectory, t);
    Vec3 a = field.a(smp.position);
    if (gauge) a += gauge->gradient(smp.position);
    return dot(a, smp.velocity);
  };
  QuadratureSpec q = spec;
  q.abs_tol = spec.abs_tol * scale;
  const auto cuts = time_cuts(s.trajectory);
  const auto est = integrate_1d(f, cuts.front(), cuts.back(), q, cuts);

  const double c = s.trajectory.charge / s.constants.hbar;
  PhaseResult r;
  r.method = PhaseMethod::WilsonLoop;
  r.phase = c * est.value;
  r.abs_error_estimate = std::abs(c) * est.error;
  r.n_evaluations = est.n_evals;
  r.converged = est.converged;
  if (!est.converged) r.note = "loop integral did not reach tolerance";
  return r;
}

PhaseResult flux_phase(const MagneticScenario& s, const QuadratureSpec& spec) {
  validate(spec);
  validate(s.source);
  validate(s.trajectory);
  const double scale = flux_scale(s.source, s.constants);
  if (scale == 0 || s.trajectory.charge == 0 || stationary(s.trajectory))
    return zero_result(PhaseMethod::EnclosedFlux, "trivially zero");

  QuadratureSpec q = spec;
  q.abs_tol = spec.abs_tol * scale;
  const FieldEvaluator field(s.source, s.constants, {spec.field_rel_tol, 0.0});
  const auto est = flux_through_loop(field, s.trajectory, q);

  const double c = s.trajectory.charge / s.constants.hbar;
  PhaseResult r;
  r.method = PhaseMethod::EnclosedFlux;
  r.phase = c * est.value;
  r.abs_error_estimate = std::abs(c) * est.error;
  r.n_evaluations = est.n_evals;
  r.converged = est.converged;
  if (!est.converged) r.note = "surface integral did not reach tolerance";
  return r;
}

PhaseResult field_overlap_phase(const MagneticScenario& s, const QuadratureSpec& spec, bool self_term) {
  validate(spec);
  validate(s.source);
  validate(s.trajectory);
  const auto& k = s.constants;
  const auto support = SupportField::for_source(s.source, k, spec.field_rel_tol);
  if (!support)
    throw ValidationError("field_overlap_phase: source has no bounded field region (use a solenoid or toroid)");

  const auto& tr = s.trajectory;
  const double q = tr.charge;
  const double scale = flux_scale(s.source, k);
  if (scale == 0 || q == 0 || stationary(tr)) return zero_result(PhaseMethod::FieldOverlap, "trivially zero");

  double d_min = kInf;
  for (const auto& p : dense_samples(tr)) d_min = std::min(d_min, support_distance(s.source, p));
  if (!(d_min > 1e-9 * characteristic_size(s.source)))
    throw GeometryError("field_overlap_phase: trajectory enters the field region of the source");

  const auto cuts = time_cuts(tr);
  const std::size_t n_in = self_term ? 4 : 3;
  const double db_scale = k.mu0 * std::abs(q) * path_length(tr) / (4 * kPi * d_min * d_min);
  QuadratureSpec inner = spec;
  inner.rel_tol = 0.1 * spec.rel_tol;
  inner.abs_tol = 1e-3 * spec.rel_tol * db_scale;
  std::int64_t inner_evals = 0;
  bool inner_ok = true;

  // int dt dB(t, x) is T independent: dB ~ v ~ 1 / T.
  FieldIntegrand f = [&](const Vec3& x, std::span<double> out) {
    auto g = [&](double t, std::span<double> o) {
      const auto smp = trajectory_sample(tr, t);
      const Vec3 db = delta_b_moving_charge(q, smp.position, smp.velocity, x, k);
      o[0] = db.x;
      o[1] = db.y;
      o[2] = db.z;
      if (o.size() > 3) o[3] = dot(db, db);
    };
    const auto est = integrate_1d_vector(g, n_in, cuts.front(), cuts.back(), inner, cuts);
    inner_evals += est.n_evals;
    inner_ok = inner_ok && est.converged;
    const Vec3 b = support->b(x);
    out[0] = b.x * est.value[0] + b.y * est.value[1] + b.z * est.value[2];
    if (self_term) out[1] = est.value[3];
  };

  QuadratureSpec outer = spec;
  outer.abs_tol = spec.abs_tol * k.mu0 * std::abs(q) * scale;
  const auto est = integrate_3d(f, self_term ? 2 : 1, support->domain(), outer);

  const double c = 1.0 / (k.mu0 * k.hbar);
  PhaseResult r;
  r.method = PhaseMethod::FieldOverlap;
  r.phase = c * est.value[0];
  r.abs_error_estimate = c * est.error[0];
  r.n_evaluations = est.n_evals + inner_evals;
  r.converged = est.converged && inner_ok;
  r.diagnostics["support_distance"] = d_min;
  if (self_term) {
    r.diagnostics["self_term"] = 0.5 * c * est.value[1];
    r.diagnostics["self_term_error"] = 0.5 * c * est.error[1];
  }
  if (const auto* fs = std::get_if<FiniteSolenoid>(&s.source)) {
    // Return flux outside the winding is not integrated; its overlap with the
    // orbit field falls off like (r_orbit^2 + a^2) / (L/2)^2.
    const Vec3 cen = trajectory_centroid(tr);
    const double off = std::abs(dot(cen - fs->center, fs->axis_dir));
    const double half = 0.5 * fs->length - off;
    double r_orb = 0;
    for (const auto& p : dense_samples(tr, 16)) r_orb = std::max(r_orb, norm(p - cen));
    const double trunc = std::abs(q * solenoid_core_flux(*fs, k) / k.hbar) * (r_orb * r_orb + fs->radius * fs->radius) /
                         std::max(half * half, 1e-300);
    r.abs_error_estimate += trunc;
    r.diagnostics["truncation_estimate"] = trunc;
    r.note = "field outside the winding not included";
  }
  if (!r.converged) r.note = r.note.empty() ? "overlap integral did not reach tolerance" : r.note + "; not converged";
  return r;
}

PhaseResult solenoid_axis_reduction_phase(const MagneticScenario& s, const QuadratureSpec& spec) {
  validate(spec);
  validate(s.trajectory);
  const auto* sol = std::get_if<IdealInfiniteSolenoid>(&s.source);
  const auto* orb = std::get_if<CircularOrbit>(&s.trajectory.path);
  if (!sol || !orb) throw ValidationError("solenoid_axis_reduction_phase: needs an ideal solenoid and a circular orbit");
  validate(s.source);
  const Vec3 axis = normalized(sol->axis_dir);
  const Vec3 rel = orb->center - sol->axis_point;
  const double size = std::max(orb->radius, sol->radius);
  if (norm(cross(normalized(orb->normal), axis)) > 1e-9 || norm(rel - dot(rel, axis) * axis) > 1e-9 * size)
    throw GeometryError("solenoid_axis_reduction_phase: orbit is not coaxial with the solenoid");
  if (!(sol->radius < orb->radius)) throw GeometryError("solenoid_axis_reduction_phase: orbit does not enclose the solenoid");
  if (sol->flux == 0 || s.trajectory.charge == 0 || orb->windings == 0)
    return zero_result(PhaseMethod::AxisReduction, "trivially zero");

  const auto& k = s.constants;
  const auto smp = trajectory_sample(s.trajectory, 0.0);
  const Vec3 c = orb->center;
  const double rr = orb->radius;
  // z = R u keeps the integrand O(1) whatever the orbit size.
  auto f = [&](double u) {
    return dot(delta_b_moving_charge(s.trajectory.charge, smp.position, smp.velocity, c + rr * u * axis, k), axis) * rr;
  };
  QuadratureSpec q = spec;
  q.rel_tol = std::min(spec.rel_tol, 1e-12);
  q.abs_tol = 1e-300;
  const auto est = integrate_1d(f, -kInf, kInf, q);

  const double c0 = sol->flux * orb->period / (k.mu0 * k.hbar);
  PhaseResult r;
  r.method = PhaseMethod::AxisReduction;
  r.phase = c0 * est.value;
  r.abs_error_estimate = std::abs(c0) * est.error;
  r.n_evaluations = est.n_evals;
  r.converged = est.converged;
  if (!est.converged) r.note = "axial integral did not reach tolerance";
  return r;
}

PhaseResult ampere_reduction_phase(const MagneticScenario& s, const QuadratureSpec& spec) {
  validate(spec);
  validate(s.trajectory);
  const auto* t = std::get_if<ToroidalCoil>(&s.source);
  if (!t) throw ValidationError("ampere_reduction_phase: needs a toroidal coil");
  validate(s.source);
  const double flux = toroid_flux(*t, s.constants);
  if (flux == 0 || s.trajectory.charge == 0 || stationary(s.trajectory))
    return zero_result(PhaseMethod::AmpereReduction, "trivially zero");

  const Vec3 n = normalized(t->plane_normal);
  const Vec3 e1 = normalized(std::abs(n.x) < 0.9 ? cross(n, Vec3{1, 0, 0}) : cross(n, Vec3{0, 1, 0}));
  const Vec3 e2 = cross(n, e1);
  constexpr int m = 512;
  std::vector<Vec3> core(m);
  for (int i = 0; i < m; ++i) {
    const double ph = 2 * kPi * i / m;
    core[i] = t->center + t->major_radius * (std::cos(ph) * e1 + std::sin(ph) * e2);
  }
  for (const auto& p : dense_samples(s.trajectory, 32))
    if (support_distance(s.source, p) <= 0)
      throw GeometryError("ampere_reduction_phase: trajectory enters the toroid");
  const auto lk = linking_number_detail(trajectory_polyline(s.trajectory, 512), core);

  const double c = s.trajectory.charge * flux / s.constants.hbar;
  PhaseResult r;
  r.method = PhaseMethod::AmpereReduction;
  r.phase = c * lk.value;
  r.abs_error_estimate = 0.0;  // integer times a closed form
  r.n_evaluations = 1;
  r.converged = true;
  r.diagnostics["linking_number"] = lk.value;
  r.diagnostics["linking_residual"] = lk.residual;
  return r;
}

PhaseResult electric_potential_phase(const ElectricScenario& s) {
  validate(s.config);
  const auto& cfg = s.config;
  const auto& k = s.constants;
  double v = 0;
  for (const auto& c : cfg.external) v += c.charge / (4 * kPi * k.eps0 * norm(cfg.test.position - c.position));
  PhaseResult r;
  r.method = PhaseMethod::ElectricPotential;
  r.phase = -cfg.test.charge * cfg.dwell_time * v / k.hbar;
  r.n_evaluations = static_cast<std::int64_t>(cfg.external.size());
  r.converged = true;
  return r;
}

PhaseResult electric_field_overlap_phase(const ElectricScenario& s, const QuadratureSpec& spec) {
  validate(spec);
  validate(s.config);
  const auto& cfg = s.config;
  std::vector<Charge> ext;
  for (const auto& c : cfg.external)
    if (c.charge != 0) ext.push_back({c.charge, c.position});
  if (ext.empty() || cfg.test.charge == 0) return zero_result(PhaseMethod::ElectricFieldOverlap, "trivially zero");
  const auto e = cross_energy(ext, {{cfg.test.charge, cfg.test.position}}, s.constants, spec);
  const double c = -cfg.dwell_time / s.constants.hbar;
  PhaseResult r;
  r.method = PhaseMethod::ElectricFieldOverlap;
  r.phase = c * e.product;
  r.abs_error_estimate = std::abs(c) * e.error;
  r.n_evaluations = e.evals;
  r.converged = e.converged;
  r.diagnostics["tail_energy"] = e.tail;
  if (!e.converged) r.note = "field overlap integral did not reach tolerance";
  return r;
}

CoulombEnergy coulomb_cross_energy(double q1, const Vec3& x1, double q2, const Vec3& x2, const PhysicalConstants& k,
                                   const QuadratureSpec& spec) {
  validate(spec);
  const double d = norm(x1 - x2);
  if (!(d > 0)) throw ValidationError("coulomb_cross_energy: charges coincide");
  CoulombEnergy r;
  r.analytic = q1 * q2 / (4 * kPi * k.eps0 * d);
  r.converged = true;
  if (q1 == 0 || q2 == 0) return r;
  const auto e = cross_energy({{q1, x1}}, {{q2, x2}}, k, spec);
  r.product_form = e.product;
  r.subtracted_form = e.subtracted;
  r.tail = e.tail;
  r.error = e.error;
  r.n_evals = e.evals;
  r.converged = e.converged;
  return r;
}

PhaseResult shell_linking_phase(const MagneticScenario& s, const QuadratureSpec& spec) {
  validate(spec);
  validate(s.source);
  validate(s.trajectory);
  const auto& src = s.source;
  const auto& tr = s.trajectory;
  const int n = spec.seed_grid;
  if (n < 2) throw ValidationError("shell_linking_phase: seed_grid must be at least 2");

  // Seed disc: centre, unit normal (the field direction through it), radius.
  Vec3 c0, nrm;
  double disc = 0, pitch = 0;
  bool axisymmetric = false;
  std::string caveat;
  if (const auto* f = std::get_if<FiniteSolenoid>(&src)) {
    nrm = normalized(f->axis_dir);
    pitch = f->length / f->n_loops;
    // Seed midway between turns.
    c0 = f->center + (f->n_loops % 2 ? 0.5 * pitch : 0.0) * nrm;
    disc = f->radius;
    axisymmetric = true;
  } else if (const auto* t = std::get_if<ToroidalCoil>(&src)) {
    Vec3 e1, e2;
    orthonormal_basis(normalized(t->plane_normal), e1, e2);
    c0 = t->center + t->major_radius * e1;
    nrm = e2;
    disc = t->minor_radius;
    pitch = 2 * kPi * (t->major_radius + t->minor_radius) / t->n_turns;
  } else if (const auto* l = std::get_if<CurrentLoop>(&src)) {
    c0 = l->center;
    nrm = normalized(l->normal);
    disc = l->radius * (1 - 1.0 / n);
    axisymmetric = true;
    caveat = "flux through the loop's own plane outside the seed disc is not seeded";
  } else {
    throw ValidationError("shell_linking_phase: needs a finite solenoid, toroidal coil or current loop");
  }
  if (tr.charge == 0 || stationary(tr) || flux_scale(src, s.constants) == 0)
    return zero_result(PhaseMethod::ShellLinking, "trivially zero");

  Vec3 u, v;
  orthonormal_basis(nrm, u, v);
  const FieldEvaluator field(src, s.constants, {spec.field_rel_tol, 0.0});

  const auto orbit = trajectory_polyline(tr, 256);
  const Vec3 oc = trajectory_centroid(tr);
  double orbit_r = 0;
  for (const auto& p : orbit) orbit_r = std::max(orbit_r, norm(p - oc));
  auto tol = [&](const Vec3& p) { return 0.5 * std::max(0.0, norm(p - oc) - orbit_r); };

  // Between turns the field keeps crossing the seed plane forwards a little
  // beyond the winding; widen the disc to where it turns back or dies off.
  if (pitch > 0) {
    const double b_floor = 1e-4 * std::abs(dot(field.b(c0), nrm));
    double wide = disc;
    for (const Vec3& d : {u, -u, v, -v}) {
      double r = disc;
      while (r < disc + 10 * pitch && dot(field.b(c0 + r * d), nrm) > b_floor) r += 0.05 * pitch;
      wide = std::max(wide, std::min(r, disc + 10 * pitch));
    }
    disc = wide;
  }
  const double dr = disc / n, dphi = 2 * kPi / n;
  // link[i][j]: linking number of the line seeded at ring i, angle j; unset when unclassified.
  std::vector<std::vector<std::optional<int>>> link(n, std::vector<std::optional<int>>(n));
  std::vector<std::vector<double>> dflux(n, std::vector<double>(n, 0.0));
  std::int64_t steps = 0;
  int traced = 0, closed = 0;
  double total = 0, unclassified = 0, backward = 0;

  // A line that comes back to the seed plane is closed there by a chord. The
  // chords all lie in the seed plane, so as long as none passes near the orbit
  // the per-circuit linking numbers add up to the enclosed flux.
  auto classify = [&](const FieldLine& line, double angle) -> std::optional<int> {
    if (!line.closed && line.returns < 1) return std::nullopt;
    std::vector<Vec3> pts = line.points;
    if (angle != 0)
      for (auto& p : pts) p = c0 + rotate_about(p - c0, nrm, angle);
    if (!line.closed) {
      const Vec3 &a = pts.back(), &b = pts.front();
      for (std::size_t k = 0; k < orbit.size(); ++k)
        if (segment_distance(a, b, orbit[k], orbit[(k + 1) % orbit.size()]) <= norm(a - b)) return std::nullopt;
    }
    try {
      return linking_number(simplify_closed_polyline(pts, tol), orbit);
    } catch (const GeometryError&) {
      return std::nullopt;
    }
  };

  for (int i = 0; i < n; ++i) {
    const double rho = (i + 0.5) * dr;
    std::optional<FieldLine> ring_line;
    double ring_angle = 0;
    for (int j = 0; j < n; ++j) {
      const double ph = (j + 0.5) * dphi;
      const Vec3 seed = c0 + rho * (std::cos(ph) * u + std::sin(ph) * v);
      const Vec3 b = field.b(seed);
      const double bn = dot(b, nrm);
      dflux[i][j] = bn * rho * dr * dphi;
      // Only forward crossings are seeded; the backward ones belong to lines already counted.
      if (bn <= 0) {
        backward += -dflux[i][j];
        dflux[i][j] = 0;
        continue;
      }
      total += dflux[i][j];
      FieldLine line;
      double angle = 0;
      if (axisymmetric) {
        if (!ring_line) {
          ring_line = trace_field_line(field, seed, spec, 1);
          ring_angle = ph;
          ++traced;
          steps += static_cast<std::int64_t>(ring_line->points.size());
        }
        line = *ring_line;
        angle = ph - ring_angle;
      } else {
        line = trace_field_line(field, seed, spec, 1);
        ++traced;
        steps += static_cast<std::int64_t>(line.points.size());
      }
      if (line.closed) ++closed;
      // Each line carries |dflux| along its own direction, which is the direction of B.
      const auto lk = classify(line, angle);
      if (lk) link[i][j] = *lk;
      else unclassified += std::abs(dflux[i][j]);
    }
  }

  double phi_enc = 0, transition = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (!link[i][j]) continue;
      phi_enc += std::abs(dflux[i][j]) * *link[i][j];
      // Cells whose neighbours link differently straddle a boundary: half their flux is uncertain.
      bool edge = false;
      for (auto [a, b] : {std::pair{i + 1, j}, std::pair{i - 1, j}, std::pair{i, (j + 1) % n}, std::pair{i, (j + n - 1) % n}})
        if (a >= 0 && a < n && link[a][b] && *link[a][b] != *link[i][j]) edge = true;
      if (edge) transition += 0.5 * std::abs(dflux[i][j]);
    }

  // Quadrature error of the seeding rule from the same rule on a half-resolution grid.
  double coarse = 0;
  {
    const int m = std::max(1, n / 2);
    const double dr2 = disc / m, dphi2 = 2 * kPi / m;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const double rho = (i + 0.5) * dr2, ph = (j + 0.5) * dphi2;
        const double bn = dot(field.b(c0 + rho * (std::cos(ph) * u + std::sin(ph) * v)), nrm);
        if (bn > 0) coarse += bn * rho * dr2 * dphi2;
      }
  }
  const double seeding = std::abs(total - coarse) / 3;

  const double c = tr.charge / s.constants.hbar;
  const double frac = total != 0 ? unclassified / std::abs(total) : 0.0;
  PhaseResult r;
  r.method = PhaseMethod::ShellLinking;
  r.phase = c * phi_enc;
  r.abs_error_estimate = std::abs(c) * (unclassified + transition + seeding);
  r.n_evaluations = steps;
  r.converged = frac <= spec.max_unclassified_fraction;
  r.diagnostics["seeded_flux"] = total;
  r.diagnostics["seed_radius"] = disc;
  r.diagnostics["backward_flux"] = backward;
  r.diagnostics["unclassified_flux"] = unclassified;
  r.diagnostics["unclassified_fraction"] = frac;
  r.diagnostics["transition_flux"] = transition;
  r.diagnostics["seeding_error"] = seeding;
  r.diagnostics["lines_traced"] = traced;
  r.diagnostics["lines_closed"] = closed;
  r.note = caveat;
  if (!r.converged) r.note += std::string(r.note.empty() ? "" : "; ") + "too much flux on unclosed field lines";
  return r;
}

}  // namespace abphase
