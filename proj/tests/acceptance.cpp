// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <abphase/errors.hpp>
#include <abphase/fields.hpp>
#include <abphase/phases.hpp>
#include <abphase/scenario.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace abphase;

namespace {

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

ScenarioConfig fixture(const std::string& name) { return load_scenario(std::string(ABPHASE_FIXTURE_DIR) + "/" + name + ".json"); }

const MethodRun& row(const RunReport& rep, const std::string& method) {
  for (const auto& r : rep.runs)
    if (r.method == method) return r;
  throw Error(rep.scenario + ": no row " + method);
}

// |normalized - 1| for a method that must have run and converged.
double dev(Check& c, const RunReport& rep, const std::string& method) {
  const auto& r = row(rep, method);
  c.expect(r.ok(), rep.scenario + " " + method + " ran and converged" + (r.error.empty() ? "" : ": " + r.error));
  return std::abs(r.normalized - 1.0);
}

void ac1(Check& c) {
  const auto rep = run_scenario(fixture("fig2_infinite_solenoid"));
  for (const char* m : {"wilson", "flux", "overlap"}) {
    const double d = dev(c, rep, m);
    c.detail << " " << m << "=" << d;
    c.expect(d <= 1e-4, std::string(m) + " within 1e-4");
  }
  const double d = dev(c, rep, "axis-reduction");
  c.detail << " axis-reduction=" << d;
  c.expect(d <= 1e-10, "axis reduction within 1e-10");
}

void ac2(Check& c) {
  const auto thread = run_scenario(fixture("fig3_toroid_threading"));
  const double d = dev(c, thread, "overlap");
  c.detail << " overlap=" << d;
  c.expect(d <= 1e-3, "threading overlap within 1e-3");
  const auto& amp = row(thread, "ampere-reduction");
  const double lk = amp.result.diagnostics.count("linking_number") ? amp.result.diagnostics.at("linking_number") : NAN;
  c.detail << " ampere=" << std::abs(amp.normalized - 1) << " (link " << lk << ")";
  c.expect(amp.ok() && std::abs(amp.normalized - 1) <= 1e-12 && lk == std::round(lk), "ampere reduction exactly one");

  const auto free = run_scenario(fixture("fig3_toroid_nonthreading"));
  for (const char* m : {"overlap", "ampere-reduction"}) {
    const auto& r = row(free, m);
    c.detail << " unthreaded " << m << "=" << std::abs(r.normalized);
    c.expect(r.ok() && std::abs(r.normalized) <= 1e-6, std::string("unthreaded ") + m + " below 1e-6");
  }
}

void ac3(Check& c) {
  const auto cfg = fixture("fig4_finite_solenoid");
  for (int grid : {32, 64}) {
    const auto rep = run_scenario(with_parameter(cfg, "quadrature.seed_grid", grid));
    const auto& flux = row(rep, "flux");
    const auto& shell = row(rep, "shell-linking");
    c.expect(flux.ok() && shell.ok(), "flux and shell linking converged");
    const double d = std::abs(shell.result.phase / flux.result.phase - 1);
    const double unclassified = shell.result.diagnostics.at("unclassified_flux") / std::abs(rep.reference);
    c.detail << " " << grid << "x" << grid << ": dev=" << d << " unclassified=" << unclassified;
    c.expect(d <= (grid == 32 ? 0.02 : 0.005), "shell linking close to the enclosed flux at " + std::to_string(grid));
    c.expect(unclassified <= 0.01, "unclassified flux below 1%");
  }
}

void ac4(Check& c) {
  const auto sweep = run_sweep(fixture("fig5_vaidman"));
  for (std::size_t i = 0; i < sweep.values.size(); ++i) {
    const auto& rep = sweep.runs[i];
    const double d = dev(c, rep, "electric-overlap");
    c.detail << " r=" << sweep.values[i] << ":" << d;
    c.expect(d <= 1e-3, "electric overlap within 1e-3");
  }
  c.expect(sweep.values == std::vector<double>{1, 2, 5}, "separations 1, 2, 5");
}

void ac5(Check& c) {
  const auto sweep = run_sweep(fixture("energy_identity"));
  for (std::size_t i = 0; i < sweep.values.size(); ++i) {
    const auto& rep = sweep.runs[i];
    const double dp = dev(c, rep, "energy-product");
    dev(c, rep, "energy-subtracted");
    const double a = row(rep, "energy-product").result.phase;
    const double b = row(rep, "energy-subtracted").result.phase;
    const double forms = std::abs(a - b) / std::abs(a);
    c.detail << " d=" << sweep.values[i] << ":" << dp << "/" << forms;
    c.expect(dp <= 1e-3, "energy within 1e-3");
    c.expect(forms <= 1e-10, "integrand forms agree within 1e-10");
  }
}

MagneticScenario solenoid_orbit(double flux, double q, int windings) {
  MagneticScenario s;
  s.source = IdealInfiniteSolenoid{{0, 0, 0}, {0, 0, 1}, 0.1, flux};
  s.trajectory.charge = q;
  s.trajectory.path = CircularOrbit{{0, 0, 0}, {0, 0, 1}, 1.0, 1.0, windings};
  s.constants = PhysicalConstants::natural();
  return s;
}

void ac6(Check& c) {
  QuadratureSpec spec;
  spec.rel_tol = 1e-8;
  const auto base = solenoid_orbit(0.8, 1.0, 1);
  const double ref = 0.8;

  // finite solenoid so that A is not a pure gradient near the orbit
  MagneticScenario fin = base;
  fin.source = FiniteSolenoid{{0, 0, 0}, {0, 0, 1}, 1.0, 20.0, 100, 1.0};
  fin.trajectory.path = CircularOrbit{{0, 0, 0.2}, {0, 0, 1}, 1.6, 2.0, 1};
  const double w0 = wilson_loop_phase(fin, spec).phase;
  double gauge = 0;
  for (const auto& g : builtin_gauge_family({0.4, -0.3, 0.5}, 1.2, 3.0))
    gauge = std::max(gauge, std::abs(wilson_loop_phase(fin, spec, g).phase - w0) / std::abs(w0));
  c.detail << " gauge=" << gauge;
  c.expect(gauge <= 10 * spec.rel_tol, "gauge invariance under the five gauge functions");

  auto rev = base;
  rev.trajectory = reversed(base.trajectory);
  double orient = std::abs(flux_phase(rev, spec).phase + flux_phase(base, spec).phase) / ref;
  orient = std::max(orient, std::abs(wilson_loop_phase(rev, spec).phase + wilson_loop_phase(base, spec).phase) / ref);
  orient = std::max(orient, std::abs(field_overlap_phase(rev, spec).phase + field_overlap_phase(base, spec).phase) / ref);
  c.detail << " orientation=" << orient;
  c.expect(orient <= 1e-6, "orientation antisymmetry");

  double winding = 0;
  for (int n = -2; n <= 2; ++n) {
    const auto s = solenoid_orbit(0.8, 1.0, n);
    winding = std::max(winding, std::abs(wilson_loop_phase(s, spec).phase - n * ref) / ref);
    winding = std::max(winding, std::abs(flux_phase(s, spec).phase - n * ref) / ref);
  }
  c.detail << " winding=" << winding;
  c.expect(winding <= 1e-6, "winding additivity for n = -2..2");

  auto slow = base;
  slow.trajectory = with_period(base.trajectory, 10 * base.trajectory.period());
  const double period = std::abs(field_overlap_phase(slow, spec).phase - field_overlap_phase(base, spec).phase) / ref;
  c.detail << " period=" << period;
  c.expect(period <= 1e-6, "overlap independent of the period");

  const double p1 = field_overlap_phase(base, spec).phase;
  const double lin_q = std::abs(field_overlap_phase(solenoid_orbit(0.8, -3.0, 1), spec).phase + 3 * p1) / (3 * ref);
  const double lin_f = std::abs(field_overlap_phase(solenoid_orbit(2.0, 1.0, 1), spec).phase - 2.5 * p1) / (2.5 * ref);
  c.detail << " linearity=" << std::max(lin_q, lin_f);
  c.expect(lin_q <= 1e-6 && lin_f <= 1e-6, "linearity in q and in the flux");

  // divergence by fourth-order central differences, scaled by the local field and filament distance;
  // the field floor covers cancellation noise where the toroid's exterior field vanishes
  const auto k = PhysicalConstants::natural();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double div = 0;
  for (const CurrentSource& src : {CurrentSource{CurrentLoop{}}, CurrentSource{FiniteSolenoid{{0, 0, 0}, {0, 0, 1}, 0.5, 3.0, 12, 1.0}},
                                   CurrentSource{ToroidalCoil{{0, 0, 0}, {0, 0, 1}, 1.0, 0.3, 24, 1.0}}}) {
    const FieldEvaluator f(src, k, FieldOptions{1e-13});
    const double floor = 1e-6 * norm(f.b(std::holds_alternative<ToroidalCoil>(src) ? Vec3{1, 0, 0} : Vec3{}));
    for (int i = 0; i < 8; ++i) {
      const Vec3 x{u(rng), u(rng), u(rng)};
      const double d = f.filament_distance(x);
      const double bm = norm(f.b(x));
      if (d < 0.05 || bm == 0) continue;
      const double h = 1e-3 * d;
      double sum = 0;
      for (int axis = 0; axis < 3; ++axis) {
        Vec3 e{};
        (axis == 0 ? e.x : axis == 1 ? e.y : e.z) = h;
        auto comp = [&](const Vec3& v) { return axis == 0 ? v.x : axis == 1 ? v.y : v.z; };
        sum += (-comp(f.b(x + e * 2)) + 8 * comp(f.b(x + e)) - 8 * comp(f.b(x - e)) + comp(f.b(x - e * 2))) / (12 * h);
      }
      div = std::max(div, std::abs(sum) * d / (bm + floor));
    }
  }
  c.detail << " divB=" << div;
  c.expect(div <= 1e-6, "divergence of B vanishes");

  // circulation of B around one wire of a long closed rectangle
  PolylineCurrent wire;
  wire.vertices = {{0, 0, -5}, {0, 0, 5}, {4, 0, 5}, {4, 0, -5}};
  wire.current = 3.0;
  const FieldEvaluator f(wire, k);
  QuadratureSpec q;
  q.rel_tol = 1e-11;
  q.abs_tol = 1e-14;
  const double circ = integrate_1d(
                          [&](double phi) {
                            const Vec3 x{0.5 * std::cos(phi), 0.5 * std::sin(phi), 0.3};
                            return dot(f.b(x), Vec3{-std::sin(phi), std::cos(phi), 0}) * 0.5;
                          },
                          0, 2 * M_PI, q)
                          .value;
  c.detail << " ampere=" << std::abs(circ / 3.0 - 1);
  c.expect(std::abs(circ / 3.0 - 1) <= 1e-8, "Ampere's law");
}

void ac7(Check& c) {
  const auto sweep = run_sweep(fixture("finite_size_sweep"));
  double prev = INFINITY, prev_flux = INFINITY;
  for (std::size_t i = 0; i < sweep.values.size(); ++i) {
    const auto& rep = sweep.runs[i];
    const double d = dev(c, rep, "overlap");
    const auto& flux = row(rep, "flux");
    const double vs_flux = std::abs(row(rep, "overlap").result.phase / flux.result.phase - 1);
    c.detail << " L=" << sweep.values[i] << ":" << d << "/" << vs_flux;
    c.expect(d <= prev, "monotone approach to the core flux at L=" + std::to_string(sweep.values[i]));
    c.expect(vs_flux <= prev_flux, "monotone approach to the enclosed flux at L=" + std::to_string(sweep.values[i]));
    prev = d;
    prev_flux = vs_flux;
    if (i + 1 == sweep.values.size()) c.expect(vs_flux <= 2e-3, "overlap within 0.2% of the enclosed flux at the longest");
  }
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void(Check&)>> criteria[] = {
      {"AC1 infinite solenoid, four methods agree", ac1},
      {"AC2 toroid threading and non-threading", ac2},
      {"AC3 shell linking converges on the finite solenoid", ac3},
      {"AC4 electric overlap equals the potential phase", ac4},
      {"AC5 Coulomb energy from the field overlap", ac5},
      {"AC6 property suite", ac6},
      {"AC7 finite-size sweep", ac7},
  };
  const double budget_s[] = {60, 120, 300, 60, 60, 600, 600};
  int failed = 0;
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs <= budget_s[i], "runtime budget");
    std::printf("%s  %s  (%.1f s)%s\n", c.pass ? "PASS" : "FAIL", criteria[i].first, secs, c.detail.str().c_str());
    std::fflush(stdout);
    failed += !c.pass;
  }
  return failed == 0 ? 0 : 1;
}
