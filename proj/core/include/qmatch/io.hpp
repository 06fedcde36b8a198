#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmatch/cdf.hpp"
#include "qmatch/experiment.hpp"
#include "qmatch/monotone_path.hpp"
#include "qmatch/objective.hpp"

namespace qmatch {

using json = nlohmann::ordered_json;

/// Accepts {"domain":[lo,hi],"knots":[{"x":..,"left":..,"right":..},..]} and
/// the shorthands {"kind":"uniform","domain":[a,b]}, {"kind":"dirac","at":c}
/// and {"kind":"atoms","atoms":[[x,mass],..]}; shorthand domains default to
/// [0,1].
Cdf parse_cdf(const json& j);
json cdf_to_json(const Cdf& d);

/// {"kind":"piecewise_linear","points":[[x,v],..]} |
/// {"kind":"quadratic","center":c} | {"kind":"tent","peak":c}.
Objective parse_objective(const json& j);
json objective_to_json(const Objective& v);

/// Parametric: {"kind":"matching"|"nam","prior":..,"q":..} or
/// {"kind":"unique_impl","prior":..,"q":..,"e":..,"n":..,"target":..};
/// finite: {"prior":..,"entries":[{"label":..,"weight":..,"atoms":[[x,m],..]},..]}
/// with "q" defaulting to `default_q` when absent.
Experiment parse_experiment(const json& j, double default_q = 0.5);
json experiment_to_json(const Experiment& exp);

json path_to_json(const MonotonePath& path);

/// Loads and parses a JSON file, reporting the path and failing field on
/// error.
json load_json_file(const std::string& path);

struct NamedCurve {
  std::string name;
  const Cdf* cdf;
};

/// Merged-knot CSV with one column per curve; x rows are duplicated at atoms
/// (left value first, then right) so step plots render jumps. Extra x values
/// (e.g. a uniform grid) can be merged in.
void write_curves_csv(std::ostream& out, const std::vector<NamedCurve>& curves,
                      const std::vector<double>& extra_points = {});

void write_pairs_csv(std::ostream& out, const std::string& x_name, const std::string& y_name,
                     const std::vector<std::pair<double, double>>& rows);

}  // namespace qmatch
