#include "qmatch/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <queue>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "qmatch/optimize.hpp"

namespace qmatch {

namespace {

constexpr size_t kChunk = size_t{1} << 16;
constexpr size_t kDeterministicCap = 24;

// Counter-based per-chunk seeding: each chunk of samples owns a generator
// seeded from (seed, chunk), so results do not depend on evaluation order.
class ChunkedUniform {
 public:
  explicit ChunkedUniform(std::uint64_t seed) : seed_(seed) {}

  double at(size_t draw_index) {
    size_t chunk = draw_index / (2 * kChunk);
    if (chunk != chunk_) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                        static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
      engine_ = std::mt19937_64(seq);
      chunk_ = chunk;
      cursor_ = chunk * 2 * kChunk;
    }
    while (cursor_ < draw_index) {
      engine_();
      ++cursor_;
    }
    ++cursor_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
  size_t chunk_ = static_cast<size_t>(-1);
  size_t cursor_ = 0;
  std::mt19937_64 engine_;
};

// Selections on finite experiments resolve to one state per entry; mirrors
// the pushforward dispatch.
std::vector<double> resolve_entry_states(const FiniteExperiment& fin, const Selection& sel) {
  const auto& entries = fin.entries();
  std::vector<double> chosen(entries.size());
  for (size_t k = 0; k < entries.size(); ++k) {
    switch (sel.kind()) {
      case Selection::Kind::per_entry:
        chosen[k] = sel.states().at(k);
        break;
      case Selection::Kind::constant:
        chosen[k] = sel.constant_value();
        break;
      case Selection::Kind::custom:
        chosen[k] = sel.fn()(entries[k].label, entries[k].posterior);
        break;
      case Selection::Kind::identity: {
        QuantileInterval iv = entries[k].posterior.quantile_interval(fin.q());
        if (!iv.singleton(1e-9)) {
          throw std::invalid_argument("simulate: identity selection needs singleton quantile sets");
        }
        chosen[k] = iv.lo;
        break;
      }
      case Selection::Kind::path:
        throw std::invalid_argument("simulate: path selections need a parametric experiment");
    }
  }
  return chosen;
}

}  // namespace

Cdf simulate(const Experiment& exp, const Selection& sel, size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  ChunkedUniform rng(seed);
  std::vector<double> samples;
  samples.reserve(n);

  if (std::holds_alternative<FiniteExperiment>(exp)) {
    const FiniteExperiment& fin = std::get<FiniteExperiment>(exp);
    const auto& entries = fin.entries();
    std::vector<double> chosen = resolve_entry_states(fin, sel);
    std::vector<double> cum(entries.size());
    double run = 0.0;
    for (size_t i = 0; i < entries.size(); ++i) {
      run += entries[i].weight;
      cum[i] = run;
    }
    for (size_t i = 0; i < n; ++i) {
      double u = rng.at(2 * i);
      size_t k = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
      k = std::min(k, entries.size() - 1);
      samples.push_back(chosen[k]);
    }
  } else {
    const ParametricExperiment& par = std::get<ParametricExperiment>(exp);
    if (par.kind() == ExperimentKind::unique_impl) {
      const UniqueImplData& u = *par.unique_data();
      double e = u.mix_weight;
      for (size_t i = 0; i < n; ++i) {
        double branch = rng.at(2 * i);
        double draw = rng.at(2 * i + 1);
        // With probability (1-e) the label comes from H_n, else from F.
        double x = branch < 1.0 - e ? gen_inverse(u.refinement.h_n, draw)
                                    : gen_inverse(par.prior(), draw);
        if (sel.kind() == Selection::Kind::custom) {
          x = sel.fn()(x, par.posterior_at(x));
        } else if (sel.kind() != Selection::Kind::identity) {
          throw std::invalid_argument(
              "simulate: perturbed experiments take the identity selection");
        }
        samples.push_back(x);
      }
    } else {
      double q = par.q();
      for (size_t i = 0; i < n; ++i) {
        double w = q * rng.at(2 * i);
        double x;
        switch (sel.kind()) {
          case Selection::Kind::path:
            x = sel.path().eval(w / q);
            break;
          case Selection::Kind::constant:
            x = sel.constant_value();
            break;
          case Selection::Kind::custom:
            x = sel.fn()(w, par.posterior_at(w));
            break;
          default:
            throw std::invalid_argument("simulate: unsupported selection for this experiment");
        }
        samples.push_back(x);
      }
    }
  }

  std::sort(samples.begin(), samples.end());
  std::vector<std::pair<double, double>> atoms;
  double unit = 1.0 / static_cast<double>(n);
  for (double x : samples) {
    if (!atoms.empty() && atoms.back().first == x) {
      atoms.back().second += unit;
    } else {
      atoms.emplace_back(x, unit);
    }
  }
  const Cdf& prior =
      std::holds_alternative<FiniteExperiment>(exp)
          ? std::get<FiniteExperiment>(exp).prior()
          : std::get<ParametricExperiment>(exp).prior();
  return Cdf::from_atoms(prior.domain(), std::move(atoms));
}

namespace {

struct IntervalEntry {
  size_t index;
  double weight;
  double lo;
  double hi;
};

// The Hall-interval violation with the largest excess: entries whose
// neighbourhoods lie inside an atom-index window must not outweigh the
// target mass there. Entries covering no atom at all enter as windows of
// zero mass.
std::optional<HallCertificate> find_hall_violation(const std::vector<IntervalEntry>& entries,
                                                   const std::vector<std::pair<double, double>>& atoms,
                                                   double slack) {
  size_t na = atoms.size();
  double best_excess = slack;
  std::optional<HallCertificate> best;

  double uncovered = 0.0;
  std::vector<size_t> uncovered_members;
  double uncovered_lo = 0.0, uncovered_hi = 0.0;
  // Neighbourhood index ranges; nb_lo > nb_hi marks an empty neighbourhood.
  std::vector<std::pair<long, long>> ranges(entries.size());
  for (size_t i = 0; i < entries.size(); ++i) {
    const IntervalEntry& e = entries[i];
    auto first = std::lower_bound(atoms.begin(), atoms.end(), e.lo - kTol,
                                  [](const auto& a, double v) { return a.first < v; });
    auto last = std::upper_bound(atoms.begin(), atoms.end(), e.hi + kTol,
                                 [](double v, const auto& a) { return v < a.first; });
    long lo = first - atoms.begin();
    long hi = static_cast<long>(last - atoms.begin()) - 1;
    ranges[i] = {lo, hi};
    if (lo > hi) {
      if (uncovered_members.empty() || e.lo < uncovered_lo) uncovered_lo = e.lo;
      if (uncovered_members.empty() || e.hi > uncovered_hi) uncovered_hi = e.hi;
      uncovered += e.weight;
      uncovered_members.push_back(e.index);
    }
  }
  if (uncovered > best_excess) {
    best_excess = uncovered;
    best = HallCertificate{uncovered_lo, uncovered_hi, uncovered, 0.0, uncovered_members};
  }

  // Group entries by the upper end of their neighbourhood; for each window
  // start j1, sweep the window end j2 upward accumulating entries whose whole
  // neighbourhood fits.
  std::vector<std::vector<size_t>> by_hi(na);
  for (size_t i = 0; i < entries.size(); ++i) {
    if (ranges[i].first <= ranges[i].second) by_hi[ranges[i].second].push_back(i);
  }
  std::vector<double> mass_prefix(na + 1, 0.0);
  for (size_t j = 0; j < na; ++j) mass_prefix[j + 1] = mass_prefix[j] + atoms[j].second;

  long best_j1 = -1, best_j2 = -1;
  for (long j1 = 0; j1 < static_cast<long>(na); ++j1) {
    double weight = 0.0;
    for (long j2 = j1; j2 < static_cast<long>(na); ++j2) {
      for (size_t i : by_hi[j2]) {
        if (ranges[i].first >= j1) weight += entries[i].weight;
      }
      double mass = mass_prefix[j2 + 1] - mass_prefix[j1];
      if (weight - mass > best_excess + 1e-15) {
        best_excess = weight - mass;
        best_j1 = j1;
        best_j2 = j2;
      }
    }
  }
  if (best_j1 >= 0) {
    double weight = 0.0;
    std::vector<size_t> members;
    for (size_t i = 0; i < entries.size(); ++i) {
      if (ranges[i].first >= best_j1 && ranges[i].second <= best_j2 &&
          ranges[i].first <= ranges[i].second) {
        weight += entries[i].weight;
        members.push_back(entries[i].index);
      }
    }
    best = HallCertificate{atoms[best_j1].first, atoms[best_j2].first, weight,
                           mass_prefix[best_j2 + 1] - mass_prefix[best_j1], std::move(members)};
  }
  return best;
}

FeasibilityVerdict fractional_feasibility(const std::vector<IntervalEntry>& entries,
                                          const std::vector<std::pair<double, double>>& atoms,
                                          double slack) {
  // Earliest-deadline greedy over atoms in ascending order maximizes the
  // placed mass; the verdict allows at most `slack` unplaced.
  std::vector<IntervalEntry> sorted = entries;
  std::sort(sorted.begin(), sorted.end(),
            [](const IntervalEntry& a, const IntervalEntry& b) { return a.lo < b.lo; });
  auto by_deadline = [](const std::pair<double, size_t>& a, const std::pair<double, size_t>& b) {
    return a.first > b.first;
  };
  std::priority_queue<std::pair<double, size_t>, std::vector<std::pair<double, size_t>>,
                      decltype(by_deadline)>
      active(by_deadline);
  std::vector<double> remaining(sorted.size());
  for (size_t i = 0; i < sorted.size(); ++i) remaining[i] = sorted[i].weight;

  std::vector<FlowEdge> edges;
  size_t next_entry = 0;
  double unplaced = 0.0;
  for (size_t j = 0; j < atoms.size(); ++j) {
    double pos = atoms[j].first;
    double capacity = atoms[j].second;
    while (next_entry < sorted.size() && sorted[next_entry].lo <= pos + kTol) {
      active.push({sorted[next_entry].hi, next_entry});
      ++next_entry;
    }
    while (capacity > kTol && !active.empty()) {
      auto [deadline, idx] = active.top();
      if (deadline < pos - kTol) {
        active.pop();
        unplaced += remaining[idx];  // interval ended with weight unplaced
        continue;
      }
      active.pop();
      double amount = std::min(capacity, remaining[idx]);
      if (amount > kTol) {
        edges.push_back(FlowEdge{sorted[idx].index, j, amount});
        remaining[idx] -= amount;
        capacity -= amount;
      }
      if (remaining[idx] > kTol) active.push({deadline, idx});
    }
  }
  while (next_entry < sorted.size()) unplaced += sorted[next_entry++].weight;
  while (!active.empty()) {
    auto [deadline, idx] = active.top();
    active.pop();
    unplaced += remaining[idx];
  }

  if (unplaced <= std::max(slack, 1e-9)) {
    return FeasibilityVerdict{true, std::move(edges), std::nullopt};
  }
  std::optional<HallCertificate> cert = find_hall_violation(entries, atoms, slack);
  if (!cert) {
    throw std::logic_error("feasibility_check: greedy failed without a Hall violation");
  }
  return FeasibilityVerdict{false, {}, std::move(cert)};
}

FeasibilityVerdict deterministic_feasibility(const std::vector<IntervalEntry>& entries,
                                             const std::vector<std::pair<double, double>>& atoms,
                                             double slack) {
  if (entries.size() > kDeterministicCap) {
    throw std::runtime_error("feasibility_check: deterministic mode capped at 24 entries");
  }
  size_t na = atoms.size();
  std::vector<double> remaining(na);
  for (size_t j = 0; j < na; ++j) remaining[j] = atoms[j].second;

  // Entries with fewer options first shrink the search tree.
  std::vector<size_t> order(entries.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto options = [&](const IntervalEntry& e) {
    size_t c = 0;
    for (const auto& [x, m] : atoms) {
      if (x >= e.lo - kTol && x <= e.hi + kTol) ++c;
    }
    return c;
  };
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return options(entries[a]) < options(entries[b]);
  });

  std::unordered_set<std::string> visited;
  std::vector<FlowEdge> chosen;
  std::function<bool(size_t)> dfs = [&](size_t k) -> bool {
    if (k == order.size()) return true;
    std::string key(sizeof(size_t) + na * sizeof(long long), '\0');
    std::memcpy(key.data(), &k, sizeof(size_t));
    for (size_t j = 0; j < na; ++j) {
      long long ticks = llround(remaining[j] * 1e12);
      std::memcpy(key.data() + sizeof(size_t) + j * sizeof(long long), &ticks, sizeof(long long));
    }
    if (!visited.insert(key).second) return false;
    const IntervalEntry& e = entries[order[k]];
    for (size_t j = 0; j < na; ++j) {
      if (atoms[j].first < e.lo - kTol || atoms[j].first > e.hi + kTol) continue;
      if (remaining[j] < e.weight - 1e-9) continue;
      remaining[j] -= e.weight;
      chosen.push_back(FlowEdge{e.index, j, e.weight});
      if (dfs(k + 1)) return true;
      chosen.pop_back();
      remaining[j] += e.weight;
    }
    return false;
  };
  if (dfs(0)) return FeasibilityVerdict{true, chosen, std::nullopt};
  std::optional<HallCertificate> cert = find_hall_violation(entries, atoms, slack);
  return FeasibilityVerdict{false, {}, std::move(cert)};
}

}  // namespace

FeasibilityVerdict feasibility_check(const FeasibilityProblem& prob, double q) {
  if (q <= 0.0 || q >= 1.0) throw std::invalid_argument("feasibility_check: q must be in (0,1)");
  std::vector<IntervalEntry> entries;
  entries.reserve(prob.experiment.entries().size());
  for (size_t i = 0; i < prob.experiment.entries().size(); ++i) {
    const FiniteEntry& e = prob.experiment.entries()[i];
    QuantileInterval iv = e.posterior.quantile_interval(q);
    entries.push_back(IntervalEntry{i, e.weight, iv.lo, iv.hi});
  }
  const auto& atoms = prob.target.atoms;
  return prob.mode == FeasibilityMode::fractional
             ? fractional_feasibility(entries, atoms, prob.slack)
             : deterministic_feasibility(entries, atoms, prob.slack);
}

bool brute_force_implementable(const AtomicDist& prior, double q, const AtomicDist& target) {
  if (prior.atoms.size() > 8) {
    throw std::invalid_argument("brute_force_implementable: prior capped at 8 atoms");
  }
  for (const auto& [x, m] : target.atoms) {
    bool on_support = false;
    for (const auto& [px, pm] : prior.atoms) {
      if (approx_eq(x, px)) {
        on_support = true;
        break;
      }
    }
    if (!on_support) {
      throw std::invalid_argument("brute_force_implementable: target must live on the prior atoms");
    }
  }
  FiniteExperiment discrete = discretize_experiment(matching_experiment(prior.to_cdf(), q), 1);
  FeasibilityProblem prob{discrete, target, FeasibilityMode::fractional};
  return feasibility_check(prob, q).feasible;
}

RegretReport regret(const Experiment& exp, const Objective& v, const Cdf& prior, double q) {
  Optimum opt = optimize_quantile_dist(v, prior, q);
  double implemented = 0.0;
  if (std::holds_alternative<FiniteExperiment>(exp)) {
    const FiniteExperiment& fin = std::get<FiniteExperiment>(exp);
    for (const FiniteEntry& e : fin.entries()) {
      QuantileInterval iv = e.posterior.quantile_interval(q);
      implemented += e.weight * argmax_interval(v, iv.lo, iv.hi).max_value;
    }
  } else {
    const ParametricExperiment& par = std::get<ParametricExperiment>(exp);
    if (par.kind() == ExperimentKind::unique_impl) {
      const UniqueImplData& u = *par.unique_data();
      double e = u.mix_weight;
      Cdf induced = e >= 1.0 ? par.prior() : mix({{1.0 - e, u.refinement.h_n}, {e, par.prior()}});
      implemented = stieltjes_integral(v, induced);
    } else {
      implemented = sweep_window_max(v.as_points(prior.domain()), par.lower_position_path(),
                                     par.upper_position_path())
                        .value;
    }
  }
  return RegretReport{opt.value, implemented, opt.value - implemented};
}

std::vector<ProbeHit> uniqueness_probe(const Experiment& exp, const Cdf& prior, double q,
                                       std::span<const double> p_grid) {
  const FiniteExperiment* finite = std::get_if<FiniteExperiment>(&exp);
  std::optional<FiniteExperiment> storage;
  if (!finite) {
    storage = discretize_experiment(std::get<ParametricExperiment>(exp), 512);
    finite = &*storage;
  }
  // Inexact discretizations shift boundary cells by up to a cell weight, so
  // the probe only reports violations beyond the discretization error.
  double slack = 0.0;
  if (finite->source_residual() > 1e-12) {
    double max_weight = 0.0;
    for (const FiniteEntry& e : finite->entries()) max_weight = std::max(max_weight, e.weight);
    slack = 10.0 * finite->source_residual() + 8.0 * max_weight;
  }
  std::vector<ProbeHit> hits;
  for (double p : p_grid) {
    Cdf hp = hp_distribution(p, prior, q);
    AtomicDist target = [&] {
      if (hp.is_atomic()) return AtomicDist(hp.domain(), hp.atoms());
      // Conditional restriction of H_p to the experiment's finite support.
      std::vector<double> support;
      for (const Knot& k : finite->prior().knots()) support.push_back(k.x);
      std::vector<std::pair<double, double>> atoms;
      double prev = 0.0;
      for (size_t i = 0; i < support.size(); ++i) {
        double upto = i + 1 < support.size() ? hp.left_limit(support[i + 1]) : 1.0;
        if (upto - prev > kTol) atoms.emplace_back(support[i], upto - prev);
        prev = upto;
      }
      return AtomicDist(hp.domain(), std::move(atoms));
    }();
    FeasibilityProblem prob{*finite, target, FeasibilityMode::fractional, slack};
    FeasibilityVerdict verdict = feasibility_check(prob, q);
    if (!verdict.feasible) {
      hits.push_back(ProbeHit{p, verdict.certificate.value_or(HallCertificate{})});
    }
  }
  return hits;
}

}  // namespace qmatch
