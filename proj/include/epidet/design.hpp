#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "epidet/rng.hpp"

namespace epidet {

using Location = std::vector<double>;

/// Axis-aligned regression domain. Integer-flagged coordinates hold counts.
struct StateBox {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> integer;

  std::size_t dim() const { return lower.size(); }
  void validate() const;
  /// Component-wise projection of x into the box.
  void clamp(std::span<double> x) const;

  bool operator==(const StateBox&) const = default;
};

enum class AcquisitionKind { min, gini, entropy };

std::string_view to_string(AcquisitionKind kind);
AcquisitionKind parse_acquisition(std::string_view name);

/// Latin hypercube sample of `count` points. Continuous coordinates put
/// exactly one point in each of the `count` equal-width bins; integer
/// coordinates are then rounded (duplicates possible when the range is
/// narrower than `count`).
std::vector<Location> lhs(const StateBox& box, std::size_t count, RngStream& rng);

/// Probability of misclassifying the sign of qhat - d under a normal
/// approximation: Phi(-|qhat - d| / stderr).
double boundary_probability(double qhat, double std_error, double d);

double acquisition_weight(double p, AcquisitionKind kind);

struct BatchDraw {
  std::vector<std::size_t> indices;  ///< into the candidate list
  bool uniform_fallback = false;     ///< every weight was zero
};

/// `batch` independent draws with replacement, proportional to weight.
BatchDraw sample_batch(std::span<const double> weights, std::size_t batch, RngStream& rng);

/// Same draw, returned as locations.
std::vector<Location> sample_batch(std::span<const Location> candidates,
                                   std::span<const double> weights, std::size_t batch,
                                   RngStream& rng, bool* uniform_fallback = nullptr);

}  // namespace epidet
