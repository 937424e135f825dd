#include "epidet/cost_model.hpp"

#include <stdexcept>

namespace epidet {

void CostParams::validate() const {
  if (!(c_fa > 0.0)) throw std::invalid_argument("c_fa must be positive");
  if (!(c_delay > 0.0)) throw std::invalid_argument("c_delay must be positive");
}

double immediate_cost(double p, const CostParams& costs) { return costs.c_fa * (1.0 - p); }

double immediate_cost(const ReducedState& x, const CostParams& costs) {
  return immediate_cost(x.p, costs);
}

double pathwise_cost(std::span<const double> p_path, std::size_t tau, const CostParams& costs) {
  if (tau >= p_path.size()) throw std::out_of_range("pathwise_cost: tau beyond path length");
  double delay = 0.0;
  for (std::size_t s = 0; s < tau; ++s) delay += p_path[s];
  return costs.c_delay * delay + immediate_cost(p_path[tau], costs);
}

}  // namespace epidet
