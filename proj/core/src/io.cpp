#include "qmatch/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "qmatch/unique.hpp"

namespace qmatch {

namespace {

Domain parse_domain(const json& j, const char* context) {
  if (!j.is_array() || j.size() != 2) {
    throw std::invalid_argument(std::string(context) + ": domain must be [lo, hi]");
  }
  return Domain(j[0].get<double>(), j[1].get<double>());
}

Domain domain_or_default(const json& j) {
  if (j.contains("domain")) return parse_domain(j.at("domain"), "cdf");
  return Domain(0.0, 1.0);
}

}  // namespace

Cdf parse_cdf(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("cdf: expected an object");
  if (j.contains("kind")) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "uniform") return Cdf::uniform(domain_or_default(j));
    if (kind == "dirac") {
      double at = j.at("at").get<double>();
      Domain dom = domain_or_default(j);
      if (!dom.contains(at)) {
        throw std::invalid_argument("cdf: dirac point outside the domain; give an explicit domain");
      }
      return Cdf::dirac(dom, at);
    }
    if (kind == "atoms") {
      std::vector<std::pair<double, double>> atoms;
      for (const auto& a : j.at("atoms")) {
        atoms.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
      }
      return Cdf::from_atoms(domain_or_default(j), std::move(atoms));
    }
    throw std::invalid_argument("cdf: unknown kind '" + kind + "'");
  }
  Domain dom = parse_domain(j.at("domain"), "cdf");
  std::vector<Knot> knots;
  for (const auto& k : j.at("knots")) {
    knots.push_back(Knot{k.at("x").get<double>(), k.at("left").get<double>(),
                         k.at("right").get<double>()});
  }
  return Cdf(dom, std::move(knots));
}

json cdf_to_json(const Cdf& d) {
  json j;
  j["domain"] = {d.domain().lo, d.domain().hi};
  json knots = json::array();
  for (const Knot& k : d.knots()) {
    knots.push_back({{"x", k.x}, {"left", k.left}, {"right", k.right}});
  }
  j["knots"] = std::move(knots);
  return j;
}

Objective parse_objective(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "piecewise_linear") {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : j.at("points")) {
      pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    return Objective::piecewise_linear(std::move(pts));
  }
  if (kind == "quadratic") return Objective::quadratic(j.at("center").get<double>());
  if (kind == "tent") return Objective::tent(j.at("peak").get<double>());
  throw std::invalid_argument("objective: unknown kind '" + kind + "'");
}

json objective_to_json(const Objective& v) {
  json j;
  switch (v.kind()) {
    case Objective::Kind::piecewise_linear: {
      j["kind"] = "piecewise_linear";
      json pts = json::array();
      for (const auto& [x, y] : v.points()) pts.push_back({x, y});
      j["points"] = std::move(pts);
      break;
    }
    case Objective::Kind::quadratic:
      j["kind"] = "quadratic";
      j["center"] = v.parameter();
      break;
    case Objective::Kind::tent:
      j["kind"] = "tent";
      j["peak"] = v.parameter();
      break;
  }
  return j;
}

Experiment parse_experiment(const json& j, double default_q) {
  if (j.contains("entries")) {
    Cdf prior = parse_cdf(j.at("prior"));
    double q = j.contains("q") ? j.at("q").get<double>() : default_q;
    std::vector<FiniteEntry> entries;
    for (const auto& e : j.at("entries")) {
      std::vector<std::pair<double, double>> atoms;
      for (const auto& a : e.at("atoms")) {
        atoms.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
      }
      entries.push_back(FiniteEntry{e.at("label").get<double>(), e.at("weight").get<double>(),
                                    AtomicDist(prior.domain(), std::move(atoms))});
    }
    return FiniteExperiment(std::move(prior), q, std::move(entries));
  }
  std::string kind = j.at("kind").get<std::string>();
  Cdf prior = parse_cdf(j.at("prior"));
  double q = j.contains("q") ? j.at("q").get<double>() : default_q;
  if (kind == "matching") return matching_experiment(prior, q);
  if (kind == "nam") return nam_experiment(prior, q);
  if (kind == "unique_impl") {
    Cdf target = parse_cdf(j.at("target"));
    double e = j.at("e").get<double>();
    int n = j.at("n").get<int>();
    return unique_experiment(target, prior, q, e, n);
  }
  throw std::invalid_argument("experiment: unknown kind '" + kind + "'");
}

json experiment_to_json(const Experiment& exp) {
  json j;
  if (const ParametricExperiment* par = std::get_if<ParametricExperiment>(&exp)) {
    switch (par->kind()) {
      case ExperimentKind::matching:
        j["kind"] = "matching";
        break;
      case ExperimentKind::nam:
        j["kind"] = "nam";
        break;
      case ExperimentKind::unique_impl:
        j["kind"] = "unique_impl";
        break;
    }
    j["prior"] = cdf_to_json(par->prior());
    j["q"] = par->q();
    if (const UniqueImplData* u = par->unique_data()) {
      j["e"] = u->mix_weight;
      j["n"] = u->refinement.level;
      j["target"] = cdf_to_json(u->target);
    }
    return j;
  }
  const FiniteExperiment& fin = std::get<FiniteExperiment>(exp);
  j["prior"] = cdf_to_json(fin.prior());
  j["q"] = fin.q();
  json entries = json::array();
  for (const FiniteEntry& e : fin.entries()) {
    json atoms = json::array();
    for (const auto& [x, m] : e.posterior.atoms) atoms.push_back({x, m});
    entries.push_back({{"label", e.label}, {"weight", e.weight}, {"atoms", std::move(atoms)}});
  }
  j["entries"] = std::move(entries);
  if (fin.source_residual() > 0.0) j["source_residual"] = fin.source_residual();
  return j;
}

json path_to_json(const MonotonePath& path) {
  json pieces = json::array();
  for (const PathPiece& p : path.pieces()) {
    pieces.push_back({{"p0", p.u0}, {"p1", p.u1}, {"x0", p.x0}, {"x1", p.x1}});
  }
  return pieces;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(path + ": cannot open");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& err) {
    throw std::invalid_argument(path + ": " + err.what());
  }
  return j;
}

void write_curves_csv(std::ostream& out, const std::vector<NamedCurve>& curves,
                      const std::vector<double>& extra_points) {
  out.precision(17);
  out << "x";
  for (const NamedCurve& c : curves) out << "," << c.name;
  out << "\n";
  std::vector<double> xs = extra_points;
  for (const NamedCurve& c : curves) {
    for (const Knot& k : c.cdf->knots()) xs.push_back(k.x);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double x : xs) {
    bool jump = false;
    for (const NamedCurve& c : curves) {
      if (c.cdf->value(x) - c.cdf->left_limit(x) > kTol) jump = true;
    }
    if (jump) {
      out << x;
      for (const NamedCurve& c : curves) out << "," << c.cdf->left_limit(x);
      out << "\n";
    }
    out << x;
    for (const NamedCurve& c : curves) out << "," << c.cdf->value(x);
    out << "\n";
  }
}

void write_pairs_csv(std::ostream& out, const std::string& x_name, const std::string& y_name,
                     const std::vector<std::pair<double, double>>& rows) {
  out.precision(17);
  out << x_name << "," << y_name << "\n";
  for (const auto& [x, y] : rows) out << x << "," << y << "\n";
}

}  // namespace qmatch
