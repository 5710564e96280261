#include <cmath>

#include "emopanel/econ.hpp"

namespace emopanel::econ {

double standardized_effect(double coef, double sd_regressor, std::optional<double> sd_dependent) {
  if (!(sd_regressor > 0)) throw InvalidArgument("standardized_effect: regressor sd must be positive");
  double e = coef * sd_regressor;
  if (sd_dependent) {
    if (!(*sd_dependent > 0)) throw InvalidArgument("standardized_effect: dependent sd must be positive");
    e /= *sd_dependent;
  }
  return e;
}

double annualize_three_day(double effect_percent) {
  if (!(effect_percent > -100)) throw InvalidArgument("annualize_three_day: effect must exceed -100%");
  return std::pow(1 + effect_percent / 100, 252.0 / 3.0) - 1;
}

}  // namespace emopanel::econ
