#pragma once

#include <cstddef>
#include <span>

#include "epidet/reduced_model.hpp"

namespace epidet {

struct CostParams {
  double c_fa = 20.0;     ///< false-alarm penalty
  double c_delay = 1.0;   ///< delay cost per period

  void validate() const;
  bool operator==(const CostParams&) const = default;
};

/// Expected cost of announcing now: C_FA * (1 - P).
double immediate_cost(const ReducedState& x, const CostParams& costs);
double immediate_cost(double p, const CostParams& costs);

/// sum_{s < tau} C_Delay * P_s + C_FA * (1 - P_tau). Throws std::out_of_range
/// if tau indexes past the end of the path.
double pathwise_cost(std::span<const double> p_path, std::size_t tau, const CostParams& costs);

}  // namespace epidet
