#include <abphase/errors.hpp>
#include <abphase/quadrature.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace abphase {

namespace {

// Kronrod abscissae (descending, last is the centre) and weights; Gauss weights
// belong to xgk[1], xgk[3], xgk[5] and the centre.
constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                           0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                           0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                           0.207784955007898467600689403773245, 0.0};
constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                           0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                           0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                           0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                          0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b;
  std::vector<double> value, error;
  double worst = 0.0;  // max component error, the refinement priority
  std::uint64_t id = 0;
};

struct PanelOrder {
  bool operator()(const Panel& x, const Panel& y) const {
    if (x.worst != y.worst) return x.worst < y.worst;
    return x.id > y.id;
  }
};

void check_finite(std::span<const double> v, double x) {
  for (double c : v)
    if (!std::isfinite(c)) {
      std::ostringstream os;
      os << "integrand returned a non-finite value at x = " << x;
      throw NumericalError(os.str());
    }
}

// One G7/K15 panel on [a, b] of the mapped integrand g.
void gk15(const VectorFunction1& g, std::size_t m, Panel& p, std::vector<double>& fc,
          std::vector<double>& f1, std::vector<double>& f2) {
  const double c = 0.5 * (p.a + p.b), h = 0.5 * (p.b - p.a);
  p.value.assign(m, 0.0);
  p.error.assign(m, 0.0);
  std::vector<double> gauss(m, 0.0), resabs(m, 0.0), resasc(m, 0.0);
  static thread_local std::vector<double> fv;
  fv.assign(15 * m, 0.0);
  g(c, fc);
  check_finite(fc, c);
  for (std::size_t k = 0; k < m; ++k) {
    p.value[k] = wgk[7] * fc[k];
    gauss[k] = wg[3] * fc[k];
    resabs[k] = wgk[7] * std::abs(fc[k]);
    fv[14 * m + k] = fc[k];
  }
  for (int j = 0; j < 7; ++j) {
    const double dx = h * xgk[j];
    g(c - dx, f1);
    check_finite(f1, c - dx);
    g(c + dx, f2);
    check_finite(f2, c + dx);
    for (std::size_t k = 0; k < m; ++k) {
      const double s = f1[k] + f2[k];
      p.value[k] += wgk[j] * s;
      resabs[k] += wgk[j] * (std::abs(f1[k]) + std::abs(f2[k]));
      if (j % 2 == 1) gauss[k] += wg[j / 2] * s;
      fv[(2 * j) * m + k] = f1[k];
      fv[(2 * j + 1) * m + k] = f2[k];
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    const double mean = 0.5 * p.value[k];
    double asc = wgk[7] * std::abs(fv[14 * m + k] - mean);
    for (int j = 0; j < 7; ++j)
      asc += wgk[j] * (std::abs(fv[(2 * j) * m + k] - mean) + std::abs(fv[(2 * j + 1) * m + k] - mean));
    const double ah = std::abs(h);
    const double kv = p.value[k] * h;
    double err = std::abs((p.value[k] - gauss[k]) * h);
    const double asc_h = asc * ah;
    const double abs_h = resabs[k] * ah;
    if (asc_h != 0.0 && err != 0.0) err = asc_h * std::min(1.0, std::pow(200.0 * err / asc_h, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    if (abs_h > std::numeric_limits<double>::min() / (50 * eps)) err = std::max(50 * eps * abs_h, err);
    p.value[k] = kv;
    p.error[k] = err;
  }
  p.worst = *std::max_element(p.error.begin(), p.error.end());
}

}  // namespace

void validate(const QuadratureSpec& s) {
  if (!(s.rel_tol > 0) || !std::isfinite(s.rel_tol)) throw ValidationError("rel_tol must be positive");
  if (!(s.abs_tol > 0) || !std::isfinite(s.abs_tol)) throw ValidationError("abs_tol must be positive");
  if (s.max_subdivisions < 1) throw ValidationError("max_subdivisions must be at least 1");
  if (!(s.truncation_radius >= 0)) throw ValidationError("truncation_radius must be non-negative");
  if (!(s.exclusion_radius >= 0)) throw ValidationError("exclusion_radius must be non-negative");
  if (!(s.field_rel_tol > 0) || s.field_rel_tol >= 1) throw ValidationError("field_rel_tol must lie in (0, 1)");
  if (!(s.closure_tol > 0) || s.closure_tol >= 1) throw ValidationError("closure_tol must lie in (0, 1)");
  if (!(s.max_arclength >= 0)) throw ValidationError("max_arclength must be non-negative");
  if (s.seed_grid < 1) throw ValidationError("seed_grid must be at least 1");
  if (!(s.max_unclassified_fraction >= 0) || s.max_unclassified_fraction > 1)
    throw ValidationError("max_unclassified_fraction must lie in [0, 1]");
  if (s.threads < 1) throw ValidationError("threads must be at least 1");
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

VectorEstimate integrate_1d_vector(const VectorFunction1& f, std::size_t m, double a, double b,
                                   const QuadratureSpec& spec, std::span<const double> breakpoints) {
  validate(spec);
  if (m == 0) throw ValidationError("integrand must have at least one component");
  if (std::isnan(a) || std::isnan(b)) throw ValidationError("integration limits must not be NaN");
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  VectorEstimate out;
  out.value.assign(m, 0.0);
  out.error.assign(m, 0.0);
  if (a == b) {
    out.converged = true;
    return out;
  }

  // Map to a finite parameter interval.
  VectorFunction1 g;
  double ta = a, tb = b;
  std::vector<double> cuts;
  const bool lo_inf = std::isinf(a), hi_inf = std::isinf(b);
  auto to_t = [&](double x) -> double {
    if (lo_inf && hi_inf) return x == 0 ? 0.0 : (std::sqrt(1 + 4 * x * x) - 1) / (2 * x);
    if (hi_inf) return (x - a) / (1 + (x - a));
    if (lo_inf) return -(b - x) / (1 + (b - x));
    return x;
  };
  if (lo_inf && hi_inf) {
    ta = -1;
    tb = 1;
    g = [&](double t, std::span<double> o) {
      const double d = 1 - t * t;
      f(t / d, o);
      const double jac = (1 + t * t) / (d * d);
      for (auto& v : o) v *= jac;
    };
  } else if (hi_inf) {
    ta = 0;
    tb = 1;
    g = [&](double t, std::span<double> o) {
      const double d = 1 - t;
      f(a + t / d, o);
      for (auto& v : o) v /= d * d;
    };
  } else if (lo_inf) {
    ta = -1;
    tb = 0;
    g = [&](double t, std::span<double> o) {
      const double d = 1 + t;
      f(b + t / d, o);
      for (auto& v : o) v /= d * d;
    };
  } else {
    g = f;
  }
  for (double x : breakpoints)
    if (x > a && x < b) cuts.push_back(to_t(x));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<double> fc(m), f1(m), f2(m);
  std::priority_queue<Panel, std::vector<Panel>, PanelOrder> heap;
  std::uint64_t next_id = 0;
  std::int64_t evals = 0;
  std::vector<double> total(m, 0.0), total_err(m, 0.0);
  auto add = [&](Panel p) {
    gk15(g, m, p, fc, f1, f2);
    evals += 15;
    for (std::size_t k = 0; k < m; ++k) {
      total[k] += p.value[k];
      total_err[k] += p.error[k];
    }
    heap.push(std::move(p));
  };
  double lo = ta;
  for (double c : cuts) {
    add(Panel{lo, c, {}, {}, 0.0, next_id++});
    lo = c;
  }
  add(Panel{lo, tb, {}, {}, 0.0, next_id++});

  auto done = [&]() {
    for (std::size_t k = 0; k < m; ++k)
      if (total_err[k] > std::max(spec.abs_tol, spec.rel_tol * std::abs(total[k]))) return false;
    return true;
  };
  bool converged = done();
  while (!converged && static_cast<std::int64_t>(heap.size()) < spec.max_subdivisions) {
    Panel p = heap.top();
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b)) break;  // cannot split further
    heap.pop();
    for (std::size_t k = 0; k < m; ++k) {
      total[k] -= p.value[k];
      total_err[k] -= p.error[k];
    }
    add(Panel{p.a, mid, {}, {}, 0.0, next_id++});
    add(Panel{mid, p.b, {}, {}, 0.0, next_id++});
    converged = done();
  }

  // Deterministic final reduction in panel order.
  std::vector<Panel> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  std::vector<double> col(panels.size());
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < panels.size(); ++i) col[i] = panels[i].value[k];
    out.value[k] = sign * pairwise_sum(col);
    for (std::size_t i = 0; i < panels.size(); ++i) col[i] = panels[i].error[k];
    out.error[k] = pairwise_sum(col);
  }
  out.n_evals = evals;
  out.converged = true;
  for (std::size_t k = 0; k < m; ++k)
    if (out.error[k] > std::max(spec.abs_tol, spec.rel_tol * std::abs(out.value[k]))) out.converged = false;
  return out;
}

Estimate integrate_1d(const std::function<double(double)>& f, double a, double b, const QuadratureSpec& spec,
                      std::span<const double> breakpoints) {
  auto r = integrate_1d_vector([&](double x, std::span<double> o) { o[0] = f(x); }, 1, a, b, spec, breakpoints);
  return Estimate{r.value[0], r.error[0], r.n_evals, r.converged};
}

}  // namespace abphase
