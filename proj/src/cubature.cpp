#include <abphase/errors.hpp>
#include <abphase/quadrature.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <thread>

namespace abphase {

namespace {

// Genz-Malik degree 7 rule with embedded degree 5 rule on [-1, 1]^n.
struct GenzMalik {
  std::size_t n;
  double w7[5], w5[4];
  static constexpr double l2 = 0.35856858280031809199064515390793749545406372969943;  // sqrt(9/70)
  static constexpr double l4 = 0.94868329805051379959966806332981556011586654179757;  // sqrt(9/10)
  static constexpr double l5 = 0.68824720161168529772162873429362352512689535661564;  // sqrt(9/19)

  explicit GenzMalik(std::size_t dim) : n(dim) {
    const double d = static_cast<double>(dim);
    w7[0] = (12824 - 9120 * d + 400 * d * d) / 19683;
    w7[1] = 980.0 / 6561;
    w7[2] = (1820 - 400 * d) / 19683;
    w7[3] = 200.0 / 19683;
    w7[4] = 6859.0 / 19683 / std::ldexp(1.0, static_cast<int>(dim));
    w5[0] = (729 - 950 * d + 50 * d * d) / 729;
    w5[1] = 245.0 / 486;
    w5[2] = (265 - 100 * d) / 1458;
    w5[3] = 25.0 / 729;
  }
};

struct Region {
  std::vector<double> c, h;
  int tag = 0;
  std::vector<double> value, error;
  double worst = 0.0;
  std::size_t split_dim = 0;
  std::uint64_t id = 0;
};

struct RegionOrder {
  bool operator()(const Region& x, const Region& y) const {
    if (x.worst != y.worst) return x.worst < y.worst;
    return x.id > y.id;
  }
};

class Evaluator {
 public:
  Evaluator(const TaggedIntegrand& f, std::size_t m, std::size_t n) : f_(f), m_(m), rule_(n) {}

  std::size_t evals_per_region() const {
    const std::size_t n = rule_.n;
    return 1 + 4 * n + 2 * n * (n - 1) + (std::size_t{1} << n);
  }

  void operator()(Region& r) const {
    const std::size_t n = rule_.n, m = m_;
    std::vector<double> x(n), f0(m), fa(m), fb(m), acc(m);
    std::vector<double> s2(m, 0.0), s3(m, 0.0), s4(m, 0.0), s5(m, 0.0);
    std::vector<double> diff(n, 0.0);
    auto eval = [&](std::span<double> out) {
      f_(x, r.tag, out);
      for (double v : out)
        if (!std::isfinite(v)) {
          std::ostringstream os;
          os << "integrand returned a non-finite value at (";
          for (std::size_t i = 0; i < n; ++i) os << (i ? ", " : "") << x[i];
          os << ")";
          throw NumericalError(os.str());
        }
    };
    auto reset = [&] { std::copy(r.c.begin(), r.c.end(), x.begin()); };
    reset();
    eval(f0);
    const double r24 = (GenzMalik::l2 * GenzMalik::l2) / (GenzMalik::l4 * GenzMalik::l4);
    for (std::size_t i = 0; i < n; ++i) {
      double d2 = 0.0;
      reset();
      x[i] = r.c[i] - GenzMalik::l2 * r.h[i];
      eval(fa);
      x[i] = r.c[i] + GenzMalik::l2 * r.h[i];
      eval(fb);
      for (std::size_t k = 0; k < m; ++k) {
        s2[k] += fa[k] + fb[k];
        acc[k] = fa[k] + fb[k] - 2 * f0[k];
      }
      x[i] = r.c[i] - GenzMalik::l4 * r.h[i];
      eval(fa);
      x[i] = r.c[i] + GenzMalik::l4 * r.h[i];
      eval(fb);
      for (std::size_t k = 0; k < m; ++k) {
        s3[k] += fa[k] + fb[k];
        const double v = acc[k] - r24 * (fa[k] + fb[k] - 2 * f0[k]);
        d2 += std::abs(v);
      }
      diff[i] = d2;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (int si = -1; si <= 1; si += 2)
          for (int sj = -1; sj <= 1; sj += 2) {
            reset();
            x[i] = r.c[i] + si * GenzMalik::l4 * r.h[i];
            x[j] = r.c[j] + sj * GenzMalik::l4 * r.h[j];
            eval(fa);
            for (std::size_t k = 0; k < m; ++k) s4[k] += fa[k];
          }
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      for (std::size_t i = 0; i < n; ++i)
        x[i] = r.c[i] + ((mask >> i) & 1 ? 1.0 : -1.0) * GenzMalik::l5 * r.h[i];
      eval(fa);
      for (std::size_t k = 0; k < m; ++k) s5[k] += fa[k];
    }
    double vol = 1.0;
    for (std::size_t i = 0; i < n; ++i) vol *= 2 * r.h[i];
    r.value.resize(m);
    r.error.resize(m);
    const auto& w7 = rule_.w7;
    const auto& w5 = rule_.w5;
    for (std::size_t k = 0; k < m; ++k) {
      const double i7 = w7[0] * f0[k] + w7[1] * s2[k] + w7[2] * s3[k] + w7[3] * s4[k] + w7[4] * s5[k];
      const double i5 = w5[0] * f0[k] + w5[1] * s2[k] + w5[2] * s3[k] + w5[3] * s4[k];
      r.value[k] = vol * i7;
      // floor at the rounding level of the rule itself
      const double floor = 50 * std::numeric_limits<double>::epsilon() * vol *
                           (std::abs(w7[0] * f0[k]) + w7[1] * std::abs(s2[k]) + std::abs(w7[2] * s3[k]) +
                            w7[3] * std::abs(s4[k]) + w7[4] * std::abs(s5[k]));
      r.error[k] = std::max(vol * std::abs(i7 - i5), floor);
    }
    r.worst = *std::max_element(r.error.begin(), r.error.end());
    // Split where the fourth difference is largest; ties go to the widest side.
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      const double a = diff[i], b = diff[best];
      if (a > b * (1 + 1e-10) || (std::abs(a - b) <= 1e-10 * b && r.h[i] > r.h[best])) best = i;
    }
    r.split_dim = best;
  }

 private:
  const TaggedIntegrand& f_;
  std::size_t m_;
  GenzMalik rule_;
};

void evaluate_all(const Evaluator& ev, std::vector<Region>& regions, int threads) {
  const std::size_t count = regions.size();
  const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
  if (nt <= 1) {
    for (auto& r : regions) ev(r);
    return;
  }
  std::vector<std::exception_ptr> errors(nt);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < count; i += nt) ev(regions[i]);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

VectorEstimate cubature(const TaggedIntegrand& f, std::size_t m, std::span<const CubatureBox> boxes,
                        const QuadratureSpec& spec) {
  validate(spec);
  if (m == 0) throw ValidationError("integrand must have at least one component");
  if (boxes.empty()) throw ValidationError("cubature needs at least one box");
  const std::size_t n = boxes.front().lo.size();
  if (n < 2 || n > 10) throw ValidationError("cubature dimension must lie in [2, 10]");
  Evaluator ev(f, m, n);

  std::vector<Region> initial;
  std::uint64_t next_id = 0;
  for (const auto& b : boxes) {
    if (b.lo.size() != n || b.hi.size() != n) throw ValidationError("cubature boxes must share one dimension");
    Region r;
    r.c.resize(n);
    r.h.resize(n);
    bool empty = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(b.lo[i]) || !std::isfinite(b.hi[i])) throw ValidationError("cubature box must be finite");
      r.c[i] = 0.5 * (b.lo[i] + b.hi[i]);
      r.h[i] = 0.5 * (b.hi[i] - b.lo[i]);
      if (r.h[i] == 0) empty = true;
      if (r.h[i] < 0) throw ValidationError("cubature box has hi < lo");
    }
    if (empty) continue;
    r.tag = b.tag;
    r.id = next_id++;
    initial.push_back(std::move(r));
  }
  VectorEstimate out;
  out.value.assign(m, 0.0);
  out.error.assign(m, 0.0);
  if (initial.empty()) {
    out.converged = true;
    return out;
  }
  evaluate_all(ev, initial, spec.threads);
  std::int64_t evals = static_cast<std::int64_t>(initial.size() * ev.evals_per_region());

  std::priority_queue<Region, std::vector<Region>, RegionOrder> heap;
  std::vector<double> total(m, 0.0), total_err(m, 0.0);
  auto account = [&](const Region& r, double s) {
    for (std::size_t k = 0; k < m; ++k) {
      total[k] += s * r.value[k];
      total_err[k] += s * r.error[k];
    }
  };
  for (auto& r : initial) {
    account(r, 1.0);
    heap.push(std::move(r));
  }
  auto done = [&] {
    for (std::size_t k = 0; k < m; ++k)
      if (total_err[k] > std::max(spec.abs_tol, spec.rel_tol * std::abs(total[k]))) return false;
    return true;
  };

  // Batch size depends only on the region count, so results do not depend on threads.
  while (!done() && static_cast<std::int64_t>(heap.size()) < spec.max_subdivisions) {
    const std::size_t batch = std::clamp<std::size_t>(heap.size() / 16, 1, 64);
    std::vector<Region> children;
    children.reserve(2 * batch);
    bool stuck = false;
    for (std::size_t b = 0; b < batch && !heap.empty(); ++b) {
      Region p = heap.top();
      const std::size_t d = p.split_dim;
      const double half = 0.5 * p.h[d];
      if (!(p.c[d] - half < p.c[d] && p.c[d] + half > p.c[d]) || half == 0) {
        stuck = true;
        break;
      }
      heap.pop();
      account(p, -1.0);
      for (int s = -1; s <= 1; s += 2) {
        Region c;
        c.c = p.c;
        c.h = p.h;
        c.h[d] = half;
        c.c[d] = p.c[d] + s * half;
        c.tag = p.tag;
        c.id = next_id++;
        children.push_back(std::move(c));
      }
    }
    if (children.empty()) break;
    evaluate_all(ev, children, spec.threads);
    evals += static_cast<std::int64_t>(children.size() * ev.evals_per_region());
    for (auto& c : children) {
      account(c, 1.0);
      heap.push(std::move(c));
    }
    if (stuck) break;
  }

  std::vector<Region> leaves;
  leaves.reserve(heap.size());
  while (!heap.empty()) {
    leaves.push_back(heap.top());
    heap.pop();
  }
  std::sort(leaves.begin(), leaves.end(), [](const Region& a, const Region& b) { return a.id < b.id; });
  std::vector<double> col(leaves.size());
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < leaves.size(); ++i) col[i] = leaves[i].value[k];
    out.value[k] = pairwise_sum(col);
    for (std::size_t i = 0; i < leaves.size(); ++i) col[i] = leaves[i].error[k];
    out.error[k] = pairwise_sum(col);
  }
  out.n_evals = evals;
  out.converged = true;
  for (std::size_t k = 0; k < m; ++k)
    if (out.error[k] > std::max(spec.abs_tol, spec.rel_tol * std::abs(out.value[k]))) out.converged = false;
  return out;
}

VectorEstimate cubature(const CubatureIntegrand& f, std::size_t m, std::span<const CubatureBox> boxes,
                        const QuadratureSpec& spec) {
  TaggedIntegrand g = [&](std::span<const double> x, int, std::span<double> out) { f(x, out); };
  return cubature(g, m, boxes, spec);
}

}  // namespace abphase
