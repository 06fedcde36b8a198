// qmatch: posterior quantile distributions induced by statistical
// experiments. Implementability bounds, the quantile matching experiment,
// optimal distributions for linear objectives, unique-implementation
// perturbations, feasibility and regret probes, and districting plans.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qmatch/gerrymander.hpp"
#include "qmatch/io.hpp"
#include "qmatch/optimize.hpp"
#include "qmatch/unique.hpp"
#include "qmatch/verify.hpp"

namespace {

using qmatch::json;

constexpr int kExitVerdictNegative = 1;
constexpr int kExitInputError = 2;

qmatch::Cdf load_cdf(const std::string& path) {
  try {
    return qmatch::parse_cdf(qmatch::load_json_file(path));
  } catch (const std::exception& err) {
    throw std::invalid_argument(path + ": " + err.what());
  }
}

qmatch::Objective load_objective(const std::string& path) {
  try {
    return qmatch::parse_objective(qmatch::load_json_file(path));
  } catch (const std::exception& err) {
    throw std::invalid_argument(path + ": " + err.what());
  }
}

qmatch::Experiment load_experiment(const std::string& path, double q) {
  try {
    return qmatch::parse_experiment(qmatch::load_json_file(path), q);
  } catch (const std::exception& err) {
    throw std::invalid_argument(path + ": " + err.what());
  }
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument(path + ": cannot write");
  return out;
}

json witness_to_json(const qmatch::ImplementabilityVerdict::Violation& v) {
  return json{{"x", v.x},
              {"side", v.side == qmatch::ImplementabilityVerdict::BoundSide::below_lower
                           ? "below_lower"
                           : "above_upper"},
              {"value", v.value},
              {"bound", v.bound},
              {"at_left_limit", v.at_left_limit}};
}

json certificate_to_json(const qmatch::HallCertificate& c) {
  return json{{"interval", {c.interval_lo, c.interval_hi}},
              {"entry_weight", c.entry_weight},
              {"target_mass", c.target_mass},
              {"entries", c.entries}};
}

std::vector<double> linspace(const qmatch::Domain& dom, int n) {
  std::vector<double> xs;
  xs.reserve(n);
  for (int i = 0; i < n; ++i) {
    xs.push_back(dom.lo + dom.width() * static_cast<double>(i) / (n - 1));
  }
  return xs;
}

qmatch::Selection make_selection(const std::string& spec, const qmatch::Experiment& exp,
                                 const std::string& target_path, double q) {
  using qmatch::Selection;
  if (spec == "identity") return Selection::identity();
  if (spec.rfind("const:", 0) == 0) return Selection::constant(std::stod(spec.substr(6)));
  if (spec == "bottom") {
    return Selection::custom([](double, const qmatch::AtomicDist& g) {
      return g.atoms.front().first;
    });
  }
  if (spec == "top") {
    return Selection::custom([](double, const qmatch::AtomicDist& g) {
      return g.atoms.back().first;
    });
  }
  if (spec == "target") {
    if (target_path.empty()) {
      throw std::invalid_argument("--selection target needs --target <cdf.json>");
    }
    const auto* par = std::get_if<qmatch::ParametricExperiment>(&exp);
    if (!par || par->kind() != qmatch::ExperimentKind::matching) {
      throw std::invalid_argument("--selection target applies to matching experiments");
    }
    return qmatch::matching_selection(load_cdf(target_path), par->prior(), q);
  }
  throw std::invalid_argument("unknown selection '" + spec +
                              "' (use target|bottom|top|identity|const:<x>)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"posterior quantile distribution toolkit"};
  app.require_subcommand(1);

  std::string prior_path, target_path, objective_path, experiment_path;
  std::string voters_path, shock_path, out_path, mode = "partisan";
  std::string selection_spec = "identity", pvals = "0,0.25,0.5,0.75,1";
  double q = 0.5, e = 0.5;
  int n_level = 3, grid = 129, curve_grid = 101;
  std::uint64_t n_samples = 100000, seed = 12345;

  auto add_q = [&](CLI::App* cmd) {
    cmd->add_option("-q,--quantile", q, "quantile of interest in (0,1)")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  };

  CLI::App* bounds = app.add_subcommand("bounds", "implementability bounds for a prior");
  bounds->add_option("--prior", prior_path, "prior cdf json")->required();
  add_q(bounds);

  CLI::App* check = app.add_subcommand("check", "is a target distribution implementable?");
  check->add_option("--prior", prior_path)->required();
  check->add_option("--target", target_path, "target cdf json")->required();
  add_q(check);

  CLI::App* matching = app.add_subcommand("matching", "the quantile matching experiment");
  matching->add_option("--prior", prior_path)->required();
  std::string kind = "matching";
  matching->add_option("--kind", kind, "matching|nam")
      ->check(CLI::IsMember({"matching", "nam"}));
  matching->add_option("--grid", grid, "plausibility check grid");
  add_q(matching);

  CLI::App* optimize = app.add_subcommand("optimize", "maximize an objective over quantile dists");
  optimize->add_option("--prior", prior_path)->required();
  optimize->add_option("--objective", objective_path, "objective json")->required();
  optimize->add_option("--out", out_path, "csv of the optimal distribution");
  add_q(optimize);

  CLI::App* implement = app.add_subcommand("implement", "matching selection for a target");
  implement->add_option("--prior", prior_path)->required();
  implement->add_option("--target", target_path)->required();
  add_q(implement);

  CLI::App* unique = app.add_subcommand("unique", "uniquely implementing perturbation");
  unique->add_option("--prior", prior_path)->required();
  unique->add_option("--target", target_path)->required();
  unique->add_option("-e,--epsilon", e, "revelation weight in (0,1]")
      ->check(CLI::Range(1e-12, 1.0));
  unique->add_option("-n,--level", n_level, "dyadic refinement level")->check(CLI::Range(0, 20));
  unique->add_option("--grid", grid, "verification grid");
  add_q(unique);

  CLI::App* regret_cmd = app.add_subcommand("regret", "designer regret of an experiment");
  regret_cmd->add_option("--experiment", experiment_path, "experiment json")->required();
  regret_cmd->add_option("--objective", objective_path)->required();
  regret_cmd->add_option("--prior", prior_path, "prior override (defaults to the experiment's)");
  add_q(regret_cmd);

  CLI::App* probe = app.add_subcommand("probe", "flat-level family feasibility probe");
  probe->add_option("--experiment", experiment_path)->required();
  probe->add_option("--prior", prior_path, "prior override (defaults to the experiment's)");
  probe->add_option("--pvals", pvals, "comma-separated levels to probe");
  add_q(probe);

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo of selected quantiles");
  simulate_cmd->add_option("--experiment", experiment_path)->required();
  simulate_cmd->add_option("--selection", selection_spec,
                           "target|bottom|top|identity|const:<x>");
  simulate_cmd->add_option("--target", target_path, "target cdf for --selection target");
  simulate_cmd->add_option("-N,--samples", n_samples, "number of draws")
      ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{100000000}));
  simulate_cmd->add_option("--seed", seed, "rng seed")->envname("QM_SEED");
  simulate_cmd->add_option("--out", out_path, "csv of the empirical cdf");
  add_q(simulate_cmd);

  CLI::App* gerry = app.add_subcommand("gerrymander", "optimal districting plans");
  gerry->add_option("--voters", voters_path, "voter type cdf json")->required();
  gerry->add_option("--shock", shock_path, "aggregate shock cdf json")->required();
  gerry->add_option("--mode", mode, "partisan|bipartisan|nonpartisan")
      ->check(CLI::IsMember({"partisan", "bipartisan", "nonpartisan"}));
  gerry->add_option("--grid", curve_grid, "seat-share curve grid");
  gerry->add_option("--out", out_path, "csv of the seat-share curve");

  CLI::App* figure1 = app.add_subcommand("figure1", "prior and bound curves as csv");
  figure1->add_option("--prior", prior_path)->required();
  figure1->add_option("--grid", curve_grid, "number of grid points")->check(CLI::Range(2, 100000));
  figure1->add_option("--out", out_path, "output csv")->required();
  add_q(figure1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(bounds)) {
      qmatch::Cdf prior = load_cdf(prior_path);
      auto [lower, upper] = qmatch::quantile_bounds(prior, q);
      emit(json{{"q", q},
                {"lower", qmatch::cdf_to_json(lower)},
                {"upper", qmatch::cdf_to_json(upper)}});
      return 0;
    }

    if (app.got_subcommand(check)) {
      qmatch::Cdf prior = load_cdf(prior_path);
      qmatch::Cdf target = load_cdf(target_path);
      qmatch::ImplementabilityVerdict v = qmatch::is_implementable(target, prior, q);
      json j{{"implementable", v.implementable}};
      j["witness"] = v.violation ? witness_to_json(*v.violation) : json(nullptr);
      emit(j);
      return v.implementable ? 0 : kExitVerdictNegative;
    }

    if (app.got_subcommand(matching)) {
      qmatch::Cdf prior = load_cdf(prior_path);
      qmatch::ParametricExperiment exp = kind == "nam" ? qmatch::nam_experiment(prior, q)
                                                       : qmatch::matching_experiment(prior, q);
      json j = qmatch::experiment_to_json(exp);
      j["bayes_residual"] = qmatch::bayes_residual(exp, grid);
      emit(j);
      return 0;
    }

    if (app.got_subcommand(optimize)) {
      qmatch::Cdf prior = load_cdf(prior_path);
      qmatch::Objective v = load_objective(objective_path);
      qmatch::Optimum opt = qmatch::optimize_quantile_dist(v, prior, q);
      json j{{"value", opt.value},
             {"h_star", qmatch::cdf_to_json(opt.h_star)},
             {"j_star", qmatch::path_to_json(opt.j_star)},
             {"uniqueness",
              opt.uniqueness == qmatch::UniquenessFlag::unique ? "unique" : "non_unique"}};
      j["alternative"] =
          opt.alternative ? qmatch::cdf_to_json(*opt.alternative) : json(nullptr);
      if (!out_path.empty()) {
        auto [lower, upper] = qmatch::quantile_bounds(prior, q);
        auto out = open_out(out_path);
        qmatch::write_curves_csv(out,
                                 {{"H_lower", &lower}, {"H_upper", &upper},
                                  {"H_star", &opt.h_star}});
        j["out"] = out_path;
      }
      emit(j);
      return 0;
    }

    if (app.got_subcommand(implement)) {
      qmatch::Cdf prior = load_cdf(prior_path);
      qmatch::Cdf target = load_cdf(target_path);
      qmatch::ImplementabilityVerdict v = qmatch::is_implementable(target, prior, q);
      if (!v.implementable) {
        emit(json{{"implementable", false}, {"witness", witness_to_json(*v.violation)}});
        return kExitVerdictNegative;
      }
      qmatch::Selection sel = qmatch::matching_selection(target, prior, q);
      qmatch::Experiment exp = qmatch::matching_experiment(prior, q);
      qmatch::PushforwardResult push = qmatch::pushforward(exp, sel);
      emit(json{{"implementable", true},
                {"selection", qmatch::path_to_json(sel.path())},
                {"pushforward", qmatch::cdf_to_json(push.dist)},
                {"ks_to_target", qmatch::ks_distance(push.dist, target)}});
      return 0;
    }

    if (app.got_subcommand(unique)) {
      qmatch::Cdf prior = load_cdf(prior_path);
      qmatch::Cdf target = load_cdf(target_path);
      qmatch::ParametricExperiment exp = qmatch::unique_experiment(target, prior, q, e, n_level);
      qmatch::Experiment wrapped = exp;
      qmatch::UniquenessVerdict uv = qmatch::verify_unique(wrapped, q, grid);
      qmatch::PushforwardResult push = qmatch::pushforward(wrapped, qmatch::Selection::identity());
      json j = qmatch::experiment_to_json(wrapped);
      j["verify_unique"] = uv.unique;
      j["max_interval_width"] = uv.max_width;
      j["bayes_residual"] = qmatch::bayes_residual(wrapped, grid);
      j["pushforward"] = qmatch::cdf_to_json(push.dist);
      emit(j);
      return uv.unique ? 0 : kExitVerdictNegative;
    }

    if (app.got_subcommand(regret_cmd)) {
      qmatch::Experiment exp = load_experiment(experiment_path, q);
      qmatch::Objective v = load_objective(objective_path);
      const qmatch::Cdf& prior =
          std::holds_alternative<qmatch::ParametricExperiment>(exp)
              ? std::get<qmatch::ParametricExperiment>(exp).prior()
              : std::get<qmatch::FiniteExperiment>(exp).prior();
      qmatch::Cdf prior_used = prior_path.empty() ? prior : load_cdf(prior_path);
      qmatch::RegretReport r = qmatch::regret(exp, v, prior_used, q);
      emit(json{{"opt_value", r.opt_value},
                {"implemented_sup", r.implemented_sup},
                {"regret", r.regret}});
      return 0;
    }

    if (app.got_subcommand(probe)) {
      qmatch::Experiment exp = load_experiment(experiment_path, q);
      const qmatch::Cdf& prior =
          std::holds_alternative<qmatch::ParametricExperiment>(exp)
              ? std::get<qmatch::ParametricExperiment>(exp).prior()
              : std::get<qmatch::FiniteExperiment>(exp).prior();
      qmatch::Cdf prior_used = prior_path.empty() ? prior : load_cdf(prior_path);
      std::vector<double> ps;
      std::stringstream ss(pvals);
      for (std::string tok; std::getline(ss, tok, ',');) ps.push_back(std::stod(tok));
      auto hits = qmatch::uniqueness_probe(exp, prior_used, q, ps);
      json j{{"probed", ps}};
      json hit_list = json::array();
      for (const qmatch::ProbeHit& h : hits) {
        hit_list.push_back({{"p", h.p}, {"certificate", certificate_to_json(h.certificate)}});
      }
      j["infeasible"] = std::move(hit_list);
      emit(j);
      return 0;
    }

    if (app.got_subcommand(simulate_cmd)) {
      qmatch::Experiment exp = load_experiment(experiment_path, q);
      if (const auto* par = std::get_if<qmatch::ParametricExperiment>(&exp)) {
        q = par->q();
        if (par->kind() == qmatch::ExperimentKind::unique_impl) selection_spec = "identity";
      }
      qmatch::Selection sel = make_selection(selection_spec, exp, target_path, q);
      qmatch::Cdf emp = qmatch::simulate(exp, sel, n_samples, seed);
      json j{{"n", n_samples}, {"seed", seed}, {"selection", selection_spec}};
      bool exact_available = sel.kind() == qmatch::Selection::Kind::path ||
                             sel.kind() == qmatch::Selection::Kind::identity ||
                             sel.kind() == qmatch::Selection::Kind::constant;
      if (exact_available) {
        qmatch::PushforwardResult push = qmatch::pushforward(exp, sel);
        j["ks_to_exact"] = qmatch::ks_distance(emp, push.dist);
      } else {
        j["ks_to_exact"] = json(nullptr);
      }
      if (!out_path.empty()) {
        auto out = open_out(out_path);
        qmatch::write_curves_csv(out, {{"empirical", &emp}});
        j["out"] = out_path;
      }
      emit(j);
      return 0;
    }

    if (app.got_subcommand(gerry)) {
      qmatch::ElectoralModel model{load_cdf(voters_path), load_cdf(shock_path)};
      qmatch::DistrictingMode m = mode == "partisan" ? qmatch::DistrictingMode::partisan
                                  : mode == "bipartisan" ? qmatch::DistrictingMode::bipartisan
                                                         : qmatch::DistrictingMode::nonpartisan;
      qmatch::DistrictPlan plan = qmatch::district_plan(model, m);
      json j{{"mode", mode},
             {"expected_seat_share", plan.expected_seat_share},
             {"h_star", qmatch::cdf_to_json(plan.h_star)},
             {"objective", qmatch::objective_to_json(plan.objective)},
             {"plan",
              {{"experiment", qmatch::experiment_to_json(plan.experiment)},
               {"selection", qmatch::path_to_json(plan.selection.path())}}}};
      if (!out_path.empty()) {
        auto out = open_out(out_path);
        qmatch::write_pairs_csv(out, "rho", "share",
                                qmatch::seat_share_curve(plan.h_star, curve_grid));
        j["out"] = out_path;
      }
      emit(j);
      return 0;
    }

    if (app.got_subcommand(figure1)) {
      qmatch::Cdf prior = load_cdf(prior_path);
      auto [lower, upper] = qmatch::quantile_bounds(prior, q);
      auto out = open_out(out_path);
      qmatch::write_curves_csv(out,
                               {{"F", &prior}, {"H_lower", &lower}, {"H_upper", &upper}},
                               linspace(prior.domain(), curve_grid));
      emit(json{{"out", out_path}, {"points", curve_grid}});
      return 0;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInputError;
  }
  return 0;
}
