#include "qmatch/cdf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qmatch {

namespace {

void merge_close_knots(std::vector<Knot>& knots) {
  std::vector<Knot> merged;
  for (const Knot& k : knots) {
    if (!merged.empty() && k.x - merged.back().x <= kTol) {
      merged.back().right = k.right;
    } else {
      merged.push_back(k);
    }
  }
  knots = std::move(merged);
}

double interp(double x, double x0, double y0, double x1, double y1) {
  if (x1 <= x0) return y1;
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

}  // namespace

Cdf::Cdf(Domain domain, std::vector<Knot> knots) : domain_(domain), knots_(std::move(knots)) {
  if (knots_.empty()) throw std::invalid_argument("Cdf: needs at least one knot");
  if (!std::is_sorted(knots_.begin(), knots_.end(),
                      [](const Knot& a, const Knot& b) { return a.x < b.x; })) {
    throw std::invalid_argument("Cdf: knots must be sorted by x");
  }
  for (Knot& k : knots_) {
    if (!domain_.contains(k.x)) {
      throw std::invalid_argument("Cdf: knot at " + std::to_string(k.x) + " outside domain");
    }
    k.x = domain_.clamp(k.x);
  }
  merge_close_knots(knots_);

  // Mass sitting before the first knot gets an explicit knot at domain.lo.
  if (knots_.front().x > domain_.lo && knots_.front().left > kTol) {
    knots_.insert(knots_.begin(), Knot{domain_.lo, 0.0, knots_.front().left});
  }
  if (approx_eq(knots_.front().x, domain_.lo)) knots_.front().left = 0.0;

  // Monotone, right-continuous, within [0,1]; clamp tolerance-level noise.
  double run = 0.0;
  for (Knot& k : knots_) {
    if (k.left < run - kTol || k.right < k.left - kTol) {
      throw std::invalid_argument("Cdf: knot values must be nondecreasing");
    }
    if (k.left < -kTol || k.right > 1.0 + kTol) {
      throw std::invalid_argument("Cdf: knot values must lie in [0,1]");
    }
    k.left = std::clamp(std::max(k.left, run), 0.0, 1.0);
    k.right = std::clamp(std::max(k.right, k.left), 0.0, 1.0);
    run = k.right;
  }
  if (!approx_eq(knots_.back().right, 1.0)) {
    throw std::invalid_argument("Cdf: value at domain.hi must equal 1");
  }
  knots_.back().right = 1.0;

  // Canonical form: drop interior knots lying on the segment through their
  // neighbours, then flat leading/trailing knots.
  std::vector<Knot> canon;
  canon.reserve(knots_.size());
  for (size_t i = 0; i < knots_.size(); ++i) {
    const Knot& k = knots_[i];
    if (i > 0 && i + 1 < knots_.size() && approx_eq(k.left, k.right)) {
      const Knot& prev = canon.back();
      const Knot& next = knots_[i + 1];
      double lin = interp(k.x, prev.x, prev.right, next.x, next.left);
      if (approx_eq(k.left, lin)) continue;
    }
    canon.push_back(k);
  }
  while (canon.size() > 1 && approx_eq(canon.front().left, canon.front().right) &&
         approx_eq(canon.front().right, canon[1].left)) {
    canon.erase(canon.begin());
  }
  while (canon.size() > 1 && approx_eq(canon.back().left, canon.back().right) &&
         approx_eq(canon[canon.size() - 2].right, canon.back().left)) {
    canon.pop_back();
  }
  if (approx_eq(canon.front().x, domain_.lo)) canon.front().left = 0.0;
  knots_ = std::move(canon);
}

Cdf Cdf::uniform(Domain domain) {
  return Cdf(domain, {Knot{domain.lo, 0.0, 0.0}, Knot{domain.hi, 1.0, 1.0}});
}

Cdf Cdf::dirac(Domain domain, double at) {
  if (!domain.contains(at)) throw std::invalid_argument("dirac: point outside domain");
  return Cdf(domain, {Knot{domain.clamp(at), 0.0, 1.0}});
}

Cdf Cdf::from_atoms(Domain domain, std::vector<std::pair<double, double>> atoms) {
  if (atoms.empty()) throw std::invalid_argument("from_atoms: no atoms");
  std::sort(atoms.begin(), atoms.end());
  std::vector<Knot> knots;
  double cum = 0.0;
  for (const auto& [x, m] : atoms) {
    if (m <= 0.0) throw std::invalid_argument("from_atoms: masses must be positive");
    if (!knots.empty() && x - knots.back().x <= kTol) {
      knots.back().right += m;
      cum += m;
      continue;
    }
    knots.push_back(Knot{x, cum, cum + m});
    cum += m;
  }
  if (!approx_eq(cum, 1.0, 1e-9)) throw std::invalid_argument("from_atoms: masses must sum to 1");
  knots.back().right = 1.0;
  return Cdf(domain, std::move(knots));
}

Cdf Cdf::from_points(Domain domain, std::vector<std::pair<double, double>> points) {
  std::vector<Knot> knots;
  knots.reserve(points.size());
  for (const auto& [x, v] : points) knots.push_back(Knot{x, v, v});
  return Cdf(domain, std::move(knots));
}

double Cdf::value(double x) const {
  if (!domain_.contains(x)) throw std::domain_error("Cdf::value: x outside domain");
  x = domain_.clamp(x);
  // Last knot with knot.x <= x.
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                             [](double v, const Knot& k) { return v < k.x; });
  if (it == knots_.begin()) return knots_.front().left;
  const Knot& k = *(it - 1);
  if (it == knots_.end()) {
    return x == k.x ? k.right : knots_.back().right;
  }
  if (x == k.x) return k.right;
  return interp(x, k.x, k.right, it->x, it->left);
}

double Cdf::left_limit(double x) const {
  if (!domain_.contains(x)) throw std::domain_error("Cdf::left_limit: x outside domain");
  x = domain_.clamp(x);
  if (x == domain_.lo) return 0.0;
  auto it = std::lower_bound(knots_.begin(), knots_.end(), x,
                             [](const Knot& k, double v) { return k.x < v; });
  if (it != knots_.end() && it->x == x) return it->left;
  if (it == knots_.begin()) return knots_.front().left;
  if (it == knots_.end()) return knots_.back().right;
  return interp(x, (it - 1)->x, (it - 1)->right, it->x, it->left);
}

bool Cdf::is_atomic(double tol) const {
  for (size_t i = 0; i + 1 < knots_.size(); ++i) {
    if (knots_[i + 1].left - knots_[i].right > tol) return false;
  }
  return true;
}

bool Cdf::is_continuous(double tol) const {
  for (const Knot& k : knots_) {
    if (k.jump() > tol) return false;
  }
  return true;
}

bool Cdf::has_positive_density(double tol) const {
  if (!is_continuous(tol)) return false;
  if (!approx_eq(knots_.front().x, domain_.lo) || !approx_eq(knots_.back().x, domain_.hi)) {
    return false;  // flat before the first or after the last knot
  }
  for (size_t i = 0; i + 1 < knots_.size(); ++i) {
    double rise = knots_[i + 1].left - knots_[i].right;
    double run = knots_[i + 1].x - knots_[i].x;
    if (rise <= tol * std::max(1.0, run)) return false;
  }
  return true;
}

std::vector<std::pair<double, double>> Cdf::atoms(double tol) const {
  std::vector<std::pair<double, double>> out;
  for (const Knot& k : knots_) {
    if (k.jump() > tol) out.emplace_back(k.x, k.jump());
  }
  return out;
}

double cdf_eval(const Cdf& d, double x, Side side) {
  return side == Side::right ? d.value(x) : d.left_limit(x);
}

double gen_inverse(const Cdf& d, double p) {
  if (p < -kTol || p > 1.0 + kTol) throw std::invalid_argument("gen_inverse: p outside [0,1]");
  p = std::clamp(p, 0.0, 1.0);
  const auto& knots = d.knots();
  if (p <= knots.front().left) return d.domain().lo;
  double prev_x = d.domain().lo;
  double prev_right = knots.front().left;
  for (const Knot& k : knots) {
    if (k.x > prev_x && k.left >= p && prev_right < p) {
      return interp(p, prev_right, prev_x, k.left, k.x);
    }
    if (k.right >= p) return k.x;
    prev_x = k.x;
    prev_right = k.right;
  }
  return d.domain().hi;
}

double upper_inverse(const Cdf& d, double p) {
  if (p < -kTol || p > 1.0 + kTol) throw std::invalid_argument("upper_inverse: p outside [0,1]");
  p = std::clamp(p, 0.0, 1.0);
  const auto& knots = d.knots();
  const Domain& dom = d.domain();
  const Knot& last = knots.back();
  if (last.x < dom.hi) {
    if (last.right <= p) return dom.hi;
  } else if (last.left <= p) {
    return dom.hi;
  }
  for (size_t i = knots.size(); i-- > 0;) {
    const Knot& k = knots[i];
    if (k.left <= p) return k.x;
    if (i > 0) {
      const Knot& prev = knots[i - 1];
      if (prev.right < p && k.x > prev.x) {
        return interp(p, prev.right, prev.x, k.left, k.x);
      }
    }
  }
  return dom.lo;
}

QuantileInterval quantile_interval(const Cdf& d, double q) {
  if (q <= 0.0 || q >= 1.0) throw std::invalid_argument("quantile_interval: q must be in (0,1)");
  QuantileInterval iv{gen_inverse(d, q), upper_inverse(d, q)};
  if (iv.lo > iv.hi + kTol) throw std::logic_error("quantile_interval: empty interval");
  if (iv.lo > iv.hi) iv.hi = iv.lo;
  return iv;
}

Cdf mix(const std::vector<std::pair<double, Cdf>>& parts) {
  if (parts.empty()) throw std::invalid_argument("mix: no parts");
  const Domain& dom = parts.front().second.domain();
  double total = 0.0;
  for (const auto& [w, d] : parts) {
    if (w < -kTol) throw std::invalid_argument("mix: negative weight");
    if (!(d.domain() == dom)) throw std::invalid_argument("mix: parts must share a domain");
    total += w;
  }
  if (!approx_eq(total, 1.0, 1e-9)) throw std::invalid_argument("mix: weights must sum to 1");

  std::vector<double> xs;
  for (const auto& [w, d] : parts) {
    for (const Knot& k : d.knots()) xs.push_back(k.x);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [](double a, double b) { return b - a <= kTol; }),
           xs.end());
  std::vector<Knot> knots;
  knots.reserve(xs.size());
  for (double x : xs) {
    double l = 0.0, r = 0.0;
    for (const auto& [w, d] : parts) {
      if (w <= 0.0) continue;
      l += w * d.left_limit(x);
      r += w * d.value(x);
    }
    knots.push_back(Knot{x, l, r});
  }
  return Cdf(dom, std::move(knots));
}

double ks_distance(const Cdf& a, const Cdf& b) {
  if (!(a.domain() == b.domain())) throw std::invalid_argument("ks_distance: domains differ");
  std::vector<double> xs{a.domain().lo, a.domain().hi};
  for (const Knot& k : a.knots()) xs.push_back(k.x);
  for (const Knot& k : b.knots()) xs.push_back(k.x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  double sup = 0.0;
  for (double x : xs) {
    sup = std::max(sup, std::fabs(a.value(x) - b.value(x)));
    sup = std::max(sup, std::fabs(a.left_limit(x) - b.left_limit(x)));
  }
  return sup;
}

bool knot_equal(const Cdf& a, const Cdf& b, double tol) {
  if (!(a.domain() == b.domain())) return false;
  if (a.knots().size() != b.knots().size()) return false;
  for (size_t i = 0; i < a.knots().size(); ++i) {
    const Knot& ka = a.knots()[i];
    const Knot& kb = b.knots()[i];
    if (std::fabs(ka.x - kb.x) > tol || std::fabs(ka.left - kb.left) > tol ||
        std::fabs(ka.right - kb.right) > tol) {
      return false;
    }
  }
  return true;
}

AtomicDist::AtomicDist(Domain d, std::vector<std::pair<double, double>> a)
    : domain(d), atoms(std::move(a)) {
  if (atoms.empty()) throw std::invalid_argument("AtomicDist: no atoms");
  std::sort(atoms.begin(), atoms.end());
  std::vector<std::pair<double, double>> merged;
  double total = 0.0;
  for (const auto& [x, m] : atoms) {
    if (m <= 0.0) throw std::invalid_argument("AtomicDist: masses must be positive");
    if (!domain.contains(x)) throw std::invalid_argument("AtomicDist: atom outside domain");
    if (!merged.empty() && x - merged.back().first <= kTol) {
      merged.back().second += m;
    } else {
      merged.emplace_back(domain.clamp(x), m);
    }
    total += m;
  }
  if (!approx_eq(total, 1.0, 1e-9)) throw std::invalid_argument("AtomicDist: masses must sum to 1");
  atoms = std::move(merged);
}

Cdf AtomicDist::to_cdf() const { return Cdf::from_atoms(domain, atoms); }

QuantileInterval AtomicDist::quantile_interval(double q) const {
  if (q <= 0.0 || q >= 1.0) throw std::invalid_argument("quantile_interval: q must be in (0,1)");
  double lo = atoms.back().first;
  double cum = 0.0;
  for (const auto& [x, m] : atoms) {
    cum += m;
    if (cum >= q) {
      lo = x;
      break;
    }
  }
  double hi = atoms.front().first;
  double before = 0.0;
  for (const auto& [x, m] : atoms) {
    if (before <= q) hi = x;
    before += m;
  }
  return QuantileInterval{lo, hi};
}

double AtomicDist::value(double x) const {
  double cum = 0.0;
  for (const auto& [pos, m] : atoms) {
    if (pos <= x) cum += m;
  }
  return cum;
}

}  // namespace qmatch
