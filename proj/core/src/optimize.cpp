#include "qmatch/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qmatch {

namespace {

// Sparse-table range maximum with leftmost/rightmost argmax.
class RangeMax {
 public:
  explicit RangeMax(const std::vector<double>& values) : n_(values.size()) {
    int levels = 1;
    while ((size_t{1} << levels) <= n_) ++levels;
    left_.resize(levels);
    right_.resize(levels);
    left_[0].resize(n_);
    right_[0].resize(n_);
    for (size_t i = 0; i < n_; ++i) {
      left_[0][i] = {values[i], static_cast<int>(i)};
      right_[0][i] = {values[i], static_cast<int>(i)};
    }
    for (int k = 1; k < levels; ++k) {
      size_t span = size_t{1} << k;
      if (span > n_) break;
      left_[k].resize(n_ - span + 1);
      right_[k].resize(n_ - span + 1);
      for (size_t i = 0; i + span <= n_; ++i) {
        left_[k][i] = pick_left(left_[k - 1][i], left_[k - 1][i + span / 2]);
        right_[k][i] = pick_right(right_[k - 1][i], right_[k - 1][i + span / 2]);
      }
    }
  }

  std::pair<double, int> max_leftmost(int l, int r) const { return query(left_, l, r, true); }
  std::pair<double, int> max_rightmost(int l, int r) const { return query(right_, l, r, false); }

 private:
  static std::pair<double, int> pick_left(std::pair<double, int> a, std::pair<double, int> b) {
    if (b.first > a.first) return b;
    if (a.first > b.first) return a;
    return a.second <= b.second ? a : b;
  }
  static std::pair<double, int> pick_right(std::pair<double, int> a, std::pair<double, int> b) {
    if (b.first > a.first) return b;
    if (a.first > b.first) return a;
    return a.second >= b.second ? a : b;
  }
  std::pair<double, int> query(const std::vector<std::vector<std::pair<double, int>>>& t, int l,
                               int r, bool leftmost) const {
    int len = r - l + 1;
    int k = 31 - __builtin_clz(len);
    const auto& a = t[k][l];
    const auto& b = t[k][r - (1 << k) + 1];
    return leftmost ? pick_left(a, b) : pick_right(a, b);
  }

  size_t n_;
  std::vector<std::vector<std::pair<double, int>>> left_, right_;
};

struct Candidate {
  bool present = false;
  double v0 = 0.0, v1 = 0.0;  // values at the subinterval ends
  double value_at(double t) const { return v0 + (v1 - v0) * t; }
};

void append_piece(std::vector<PathPiece>& out, double u0, double u1, double x0, double x1) {
  if (u1 <= u0) return;
  if (!out.empty()) {
    PathPiece& prev = out.back();
    double s_prev = prev.u1 > prev.u0 ? (prev.x1 - prev.x0) / (prev.u1 - prev.u0) : 0.0;
    double s_cur = (x1 - x0) / (u1 - u0);
    if (std::fabs(prev.u1 - u0) <= 1e-15 && std::fabs(prev.x1 - x0) <= 1e-13 &&
        std::fabs(s_prev - s_cur) <= 1e-9 * (1.0 + std::fabs(s_prev))) {
      prev.u1 = u1;
      prev.x1 = x1;
      return;
    }
  }
  out.push_back(PathPiece{u0, u1, x0, x1});
}

}  // namespace

WindowSweepResult sweep_window_max(const std::vector<std::pair<double, double>>& v_points,
                                   const PlPath& window_lo, const PlPath& window_hi) {
  if (v_points.size() < 2) throw std::invalid_argument("sweep: objective needs >= 2 points");
  const size_t nv = v_points.size();
  std::vector<double> vx(nv), vv(nv);
  for (size_t i = 0; i < nv; ++i) {
    vx[i] = v_points[i].first;
    vv[i] = v_points[i].second;
  }
  RangeMax rmq(vv);

  // Piecewise-linear evaluation through the segment containing the window at
  // the midpoint of the current event interval; positions stay inside one
  // segment between events, so the linear extension is exact.
  auto segment_at = [&](double x) -> size_t {
    auto it = std::upper_bound(vx.begin(), vx.end(), x);
    size_t s = it == vx.begin() ? 0 : static_cast<size_t>(it - vx.begin()) - 1;
    return std::min(s, nv - 2);
  };
  auto seg_eval = [&](size_t s, double x) {
    double t = (x - vx[s]) / (vx[s + 1] - vx[s]);
    return vv[s] + (vv[s + 1] - vv[s]) * t;
  };

  std::vector<double> events{0.0, 1.0};
  auto add_events = [&](const PlPath& path) {
    for (const PathPiece& p : path.pieces) {
      events.push_back(p.u0);
      events.push_back(p.u1);
      if (p.x0 != p.x1 && p.u1 > p.u0) {
        double xmin = std::min(p.x0, p.x1), xmax = std::max(p.x0, p.x1);
        auto first = std::upper_bound(vx.begin(), vx.end(), xmin);
        auto last = std::lower_bound(vx.begin(), vx.end(), xmax);
        for (auto it = first; it != last; ++it) {
          double t = (*it - p.x0) / (p.x1 - p.x0);
          if (t > 0.0 && t < 1.0) events.push_back(p.u0 + t * (p.u1 - p.u0));
        }
      }
    }
  };
  add_events(window_lo);
  add_events(window_hi);
  for (double& e : events) e = std::clamp(e, 0.0, 1.0);
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());

  WindowSweepResult result{0.0, {}, {}, false};
  long double total = 0.0L;

  for (size_t ei = 0; ei + 1 < events.size(); ++ei) {
    double ua = events[ei], ub = events[ei + 1];
    double len = ub - ua;
    if (len <= 0.0) continue;
    double um = 0.5 * (ua + ub);
    const PathPiece& plo = window_lo.pieces[window_lo.piece_index(um)];
    const PathPiece& phi = window_hi.pieces[window_hi.piece_index(um)];
    double xlo_m = plo.x_at(um), xhi_m = phi.x_at(um);
    if (xlo_m > xhi_m + 1e-9) throw std::logic_error("sweep: window endpoints crossed");

    size_t slo = segment_at(xlo_m), shi = segment_at(xhi_m);
    Candidate A{true, seg_eval(slo, plo.x_at(ua)), seg_eval(slo, plo.x_at(ub))};
    Candidate B{true, seg_eval(shi, phi.x_at(ua)), seg_eval(shi, phi.x_at(ub))};
    Candidate C;
    int cl = -1, cr = -1;
    {
      auto first = std::lower_bound(vx.begin(), vx.end(), xlo_m);
      auto last = std::upper_bound(vx.begin(), vx.end(), xhi_m);
      if (first != last) {
        int l = static_cast<int>(first - vx.begin());
        int r = static_cast<int>(last - vx.begin()) - 1;
        auto [val_l, idx_l] = rmq.max_leftmost(l, r);
        auto [val_r, idx_r] = rmq.max_rightmost(l, r);
        C = Candidate{true, val_l, val_l};
        cl = idx_l;
        cr = idx_r;
      }
    }

    // Split at pairwise crossings of the candidate value lines.
    double cuts_buf[3];
    int ncuts = 0;
    auto add_cut = [&](const Candidate& f, const Candidate& g) {
      if (!f.present || !g.present) return;
      double d0 = f.v0 - g.v0, d1 = f.v1 - g.v1;
      if (d0 == d1) return;
      double t = d0 / (d0 - d1);
      if (t > 1e-12 && t < 1.0 - 1e-12) cuts_buf[ncuts++] = ua + t * len;
    };
    add_cut(A, B);
    add_cut(A, C);
    add_cut(B, C);
    std::sort(cuts_buf, cuts_buf + ncuts);

    double sub_bounds[5];
    int nsub = 0;
    sub_bounds[nsub++] = ua;
    for (int i = 0; i < ncuts; ++i) {
      if (cuts_buf[i] > sub_bounds[nsub - 1] + 1e-15) sub_bounds[nsub++] = cuts_buf[i];
    }
    if (ub > sub_bounds[nsub - 1]) sub_bounds[nsub++] = ub;

    for (int si = 0; si + 1 < nsub; ++si) {
      double s0 = sub_bounds[si], s1 = sub_bounds[si + 1];
      double t0 = (s0 - ua) / len, t1 = (s1 - ua) / len;
      double a0 = A.value_at(t0), a1 = A.value_at(t1);
      double b0 = B.value_at(t0), b1 = B.value_at(t1);
      double c0 = C.present ? C.v0 : -std::numeric_limits<double>::infinity();
      double best0 = std::max({a0, b0, c0});
      double best1 = std::max({a1, b1, c0});
      double tol = 1e-12 * (1.0 + std::max(std::fabs(best0), std::fabs(best1)));
      bool winA = a0 >= best0 - tol && a1 >= best1 - tol;
      bool winB = b0 >= best0 - tol && b1 >= best1 - tol;
      bool winC = C.present && C.v0 >= best0 - tol && C.v0 >= best1 - tol;

      double sm = 0.5 * (s0 + s1);
      double pos_lo0 = plo.x_at(s0), pos_lo1 = plo.x_at(s1);
      double pos_hi0 = phi.x_at(s0), pos_hi1 = phi.x_at(s1);

      // Positive-measure ties need two argmax positions that actually differ.
      double wpos_min = std::numeric_limits<double>::infinity();
      double wpos_max = -std::numeric_limits<double>::infinity();
      auto note_pos = [&](double x) {
        wpos_min = std::min(wpos_min, x);
        wpos_max = std::max(wpos_max, x);
      };
      if (winA) note_pos(plo.x_at(sm));
      if (winB) note_pos(phi.x_at(sm));
      if (winC) {
        note_pos(vx[cl]);
        note_pos(vx[cr]);
      }
      if (wpos_max - wpos_min > 1e-9 && s1 - s0 > 1e-12) result.positive_measure_ties = true;

      // Min-argmax prefers the lowest position: window bottom, then the
      // leftmost interior kink, then the window top.
      if (winA) {
        append_piece(result.min_arg, s0, s1, pos_lo0, pos_lo1);
      } else if (winC) {
        append_piece(result.min_arg, s0, s1, vx[cl], vx[cl]);
      } else {
        append_piece(result.min_arg, s0, s1, pos_hi0, pos_hi1);
      }
      if (winB) {
        append_piece(result.max_arg, s0, s1, pos_hi0, pos_hi1);
      } else if (winC) {
        append_piece(result.max_arg, s0, s1, vx[cr], vx[cr]);
      } else {
        append_piece(result.max_arg, s0, s1, pos_lo0, pos_lo1);
      }

      double w0 = winA ? a0 : (winC ? C.v0 : b0);
      double w1 = winA ? a1 : (winC ? C.v0 : b1);
      total += 0.5L * (static_cast<long double>(w0) + w1) * (s1 - s0);
    }
  }

  result.value = static_cast<double>(total);
  return result;
}

QuantileInterval feasible_interval(const Cdf& prior, double q, double p) {
  if (p < -kTol || p > 1.0 + kTol) throw std::invalid_argument("feasible_interval: p outside [0,1]");
  p = std::clamp(p, 0.0, 1.0);
  auto [lower, upper] = quantile_bounds(prior, q);
  return QuantileInterval{gen_inverse(upper, p), gen_inverse(lower, p)};
}

Optimum optimize_quantile_dist(const Objective& v, const Cdf& prior, double q) {
  auto [lower, upper] = quantile_bounds(prior, q);
  auto v_pts = v.as_points(prior.domain());
  PlPath wlo = MonotonePath::quantile_path(upper).as_pl_path();
  PlPath whi = MonotonePath::quantile_path(lower).as_pl_path();
  WindowSweepResult sweep = sweep_window_max(v_pts, wlo, whi);
  MonotonePath j_star(prior.domain(), sweep.min_arg);
  Cdf h_star = j_star.to_cdf();
  std::optional<Cdf> alternative;
  if (sweep.positive_measure_ties) {
    alternative = MonotonePath(prior.domain(), sweep.max_arg).to_cdf();
  }
  return Optimum{std::move(h_star), sweep.value, std::move(j_star),
                 sweep.positive_measure_ties ? UniquenessFlag::non_unique : UniquenessFlag::unique,
                 std::move(alternative)};
}

Cdf solution_quasiconcave(double x_star, const Cdf& prior, double q) {
  if (!prior.domain().contains(x_star)) {
    throw std::invalid_argument("solution_quasiconcave: x_star outside domain");
  }
  x_star = prior.domain().clamp(x_star);
  auto [lower, upper] = quantile_bounds(prior, q);
  std::vector<Knot> knots;
  for (const Knot& k : lower.knots()) {
    if (k.x < x_star - kTol) knots.push_back(k);
  }
  knots.push_back(Knot{x_star, lower.left_limit(x_star), upper.value(x_star)});
  for (const Knot& k : upper.knots()) {
    if (k.x > x_star + kTol) knots.push_back(k);
  }
  return Cdf(prior.domain(), std::move(knots));
}

Cdf hp_distribution(double p, const Cdf& prior, double q) {
  if (p < -kTol || p > 1.0 + kTol) throw std::invalid_argument("hp_distribution: p outside [0,1]");
  p = std::clamp(p, 0.0, 1.0);
  auto [lower, upper] = quantile_bounds(prior, q);
  double x_lo = gen_inverse(prior, q * p);
  double x_hi = gen_inverse(prior, q + (1.0 - q) * p);
  std::vector<Knot> knots;
  for (const Knot& k : upper.knots()) {
    if (k.x < x_lo - kTol) knots.push_back(k);
  }
  if (x_hi > x_lo + kTol) {
    knots.push_back(Knot{x_lo, upper.left_limit(x_lo), p});
    knots.push_back(Knot{x_hi, p, lower.value(x_hi)});
  } else {
    knots.push_back(Knot{x_lo, upper.left_limit(x_lo), lower.value(x_lo)});
  }
  for (const Knot& k : lower.knots()) {
    if (k.x > x_hi + kTol) knots.push_back(k);
  }
  return Cdf(prior.domain(), std::move(knots));
}

Cdf solution_quasiconvex(const Objective& v, const Cdf& prior, double q) {
  if (v.kind() != Objective::Kind::quadratic) {
    // Slopes must fall then rise with no flats and a single sign change.
    auto pts = v.as_points(prior.domain());
    bool seen_positive = false;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      double slope = (pts[i + 1].second - pts[i].second) / (pts[i + 1].first - pts[i].first);
      if (std::fabs(slope) <= kTol) {
        throw std::invalid_argument("solution_quasiconvex: objective has a flat stretch");
      }
      if (slope > 0.0) {
        seen_positive = true;
      } else if (seen_positive) {
        throw std::invalid_argument("solution_quasiconvex: objective is not quasi-convex");
      }
    }
  }

  auto indifference = [&](double p) {
    double x_lo = gen_inverse(prior, q * p);
    double x_hi = gen_inverse(prior, q + (1.0 - q) * p);
    return v.eval(x_lo) - v.eval(x_hi);
  };
  double p_star;
  if (indifference(0.0) <= 0.0) {
    p_star = 0.0;
  } else if (indifference(1.0) >= 0.0) {
    p_star = 1.0;
  } else {
    double lo = 0.0, hi = 1.0;
    p_star = 0.5;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      double mid = 0.5 * (lo + hi);
      double d = indifference(mid);
      if (d == 0.0) {
        lo = hi = mid;
      } else if (d > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    p_star = 0.5 * (lo + hi);
  }
  Cdf h = hp_distribution(p_star, prior, q);

  Optimum opt = optimize_quantile_dist(v, prior, q);
  double achieved = stieltjes_integral(v, h);
  if (std::fabs(achieved - opt.value) > 1e-8 * (1.0 + std::fabs(opt.value))) {
    throw std::logic_error("solution_quasiconvex: closed form disagrees with the optimizer");
  }
  return h;
}

}  // namespace qmatch
