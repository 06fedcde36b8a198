#include "qmatch/monotone_path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qmatch {

namespace {

size_t locate_piece(const std::vector<PathPiece>& pieces, double u) {
  // Left-continuous: u belongs to the piece with u0 < u <= u1; u at a shared
  // boundary goes to the earlier piece.
  size_t lo = 0, hi = pieces.size();
  while (lo + 1 < hi) {
    size_t mid = (lo + hi) / 2;
    if (pieces[mid].u0 < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

double PlPath::eval(double u) const {
  size_t i = locate_piece(pieces, u);
  return pieces[i].x_at(u);
}

size_t PlPath::piece_index(double u) const { return locate_piece(pieces, u); }

std::vector<double> PlPath::breakpoints() const {
  std::vector<double> out;
  out.reserve(pieces.size() + 1);
  for (const PathPiece& p : pieces) out.push_back(p.u0);
  out.push_back(pieces.back().u1);
  return out;
}

MonotonePath::MonotonePath(Domain domain, std::vector<PathPiece> pieces)
    : domain_(domain), pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw std::invalid_argument("MonotonePath: no pieces");
  std::sort(pieces_.begin(), pieces_.end(),
            [](const PathPiece& a, const PathPiece& b) { return a.u0 < b.u0; });
  double u_cursor = 0.0;
  double x_cursor = domain_.lo;
  for (PathPiece& p : pieces_) {
    if (std::fabs(p.u0 - u_cursor) > 1e-9) {
      throw std::invalid_argument("MonotonePath: pieces must cover [0,1] contiguously");
    }
    p.u0 = u_cursor;
    if (p.u1 < p.u0) throw std::invalid_argument("MonotonePath: piece with negative length");
    if (p.x1 < p.x0 - 1e-9 || p.x0 < x_cursor - 1e-9) {
      throw std::invalid_argument("MonotonePath: x must be nondecreasing");
    }
    p.x0 = std::max(p.x0, x_cursor);
    p.x1 = std::max(p.x1, p.x0);
    if (!domain_.contains(p.x0) || !domain_.contains(p.x1)) {
      throw std::invalid_argument("MonotonePath: x outside domain");
    }
    p.x0 = domain_.clamp(p.x0);
    p.x1 = domain_.clamp(p.x1);
    u_cursor = p.u1;
    x_cursor = p.x1;
  }
  if (std::fabs(u_cursor - 1.0) > 1e-9) {
    throw std::invalid_argument("MonotonePath: pieces must end at u = 1");
  }
  pieces_.back().u1 = 1.0;
  // Drop zero-length pieces that carry no jump information.
  std::vector<PathPiece> kept;
  kept.reserve(pieces_.size());
  for (const PathPiece& p : pieces_) {
    if (p.u1 - p.u0 <= 0.0) continue;
    if (!kept.empty()) {
      PathPiece& prev = kept.back();
      bool same_slope = false;
      if (prev.x1 == p.x0 && prev.u1 == p.u0) {
        double s_prev = (prev.u1 - prev.u0) > 0 ? (prev.x1 - prev.x0) / (prev.u1 - prev.u0) : 0.0;
        double s_cur = (p.x1 - p.x0) / (p.u1 - p.u0);
        same_slope = std::fabs(s_prev - s_cur) <= kTol * (1.0 + std::fabs(s_prev));
      }
      if (same_slope) {
        prev.u1 = p.u1;
        prev.x1 = p.x1;
        continue;
      }
    }
    kept.push_back(p);
  }
  if (kept.empty()) kept.push_back(PathPiece{0.0, 1.0, pieces_.front().x0, pieces_.front().x0});
  kept.front().u0 = 0.0;
  kept.back().u1 = 1.0;
  pieces_ = std::move(kept);
}

double MonotonePath::eval(double u) const {
  if (u < -kTol || u > 1.0 + kTol) throw std::invalid_argument("MonotonePath: u outside [0,1]");
  u = std::clamp(u, 0.0, 1.0);
  if (u == 0.0) return domain_.lo;
  return pieces_[locate_piece(pieces_, u)].x_at(u);
}

Cdf MonotonePath::to_cdf() const {
  // Each flat piece is an atom, each rising piece a linear CDF segment, and
  // each x-jump between pieces a flat CDF stretch. The knot candidates arrive
  // in nondecreasing (x, u) order; candidates at one x merge into one knot.
  std::vector<Knot> knots;
  auto push = [&](double x, double u_lo, double u_hi) {
    if (!knots.empty() && x - knots.back().x <= kTol) {
      knots.back().right = u_hi;
    } else {
      knots.push_back(Knot{x, u_lo, u_hi});
    }
  };
  for (const PathPiece& p : pieces_) {
    if (p.x1 - p.x0 <= kTol) {
      push(p.x0, p.u0, p.u1);
    } else {
      push(p.x0, p.u0, p.u0);
      push(p.x1, p.u1, p.u1);
    }
  }
  return Cdf(domain_, std::move(knots));
}

MonotonePath MonotonePath::quantile_path(const Cdf& d) {
  std::vector<PathPiece> pieces;
  const auto& knots = d.knots();
  for (size_t i = 0; i < knots.size(); ++i) {
    const Knot& k = knots[i];
    if (k.right > k.left) pieces.push_back(PathPiece{k.left, k.right, k.x, k.x});
    if (i + 1 < knots.size() && knots[i + 1].left > k.right) {
      pieces.push_back(PathPiece{k.right, knots[i + 1].left, k.x, knots[i + 1].x});
    }
  }
  return MonotonePath(d.domain(), std::move(pieces));
}

MonotonePath MonotonePath::constant(Domain domain, double x) {
  return MonotonePath(domain, {PathPiece{0.0, 1.0, x, x}});
}

PlPath restrict_affine(const MonotonePath& base, double a, double b) {
  if (std::fabs(b) <= kTol) {
    double x = base.eval(std::clamp(a, 0.0, 1.0));
    return PlPath{base.domain(), {PathPiece{0.0, 1.0, x, x}}};
  }
  double p_start = a, p_end = a + b;
  if (std::min(p_start, p_end) < -1e-9 || std::max(p_start, p_end) > 1.0 + 1e-9) {
    throw std::invalid_argument("restrict_affine: image leaves [0,1]");
  }
  double p_lo = std::clamp(std::min(p_start, p_end), 0.0, 1.0);
  double p_hi = std::clamp(std::max(p_start, p_end), 0.0, 1.0);
  auto to_u = [&](double p) { return (p - a) / b; };

  std::vector<PathPiece> out;
  for (const PathPiece& piece : base.pieces()) {
    double s0 = std::max(piece.u0, p_lo);
    double s1 = std::min(piece.u1, p_hi);
    if (s1 <= s0) continue;
    out.push_back(PathPiece{to_u(s0), to_u(s1), piece.x_at(s0), piece.x_at(s1)});
  }
  if (b < 0) {
    std::reverse(out.begin(), out.end());
    for (PathPiece& p : out) {
      std::swap(p.u0, p.u1);
      std::swap(p.x0, p.x1);
    }
  }
  if (out.empty()) {
    double x = base.eval(p_lo);
    out.push_back(PathPiece{0.0, 1.0, x, x});
  }
  out.front().u0 = 0.0;
  out.back().u1 = 1.0;
  return PlPath{base.domain(), std::move(out)};
}

}  // namespace qmatch
