#include "epidet/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace epidet {

void StateBox::validate() const {
  if (lower.empty() || lower.size() != upper.size() || lower.size() != integer.size()) {
    throw std::invalid_argument("StateBox: bounds and flags must have equal, nonzero length");
  }
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (!(lower[j] < upper[j])) throw std::invalid_argument("StateBox: lower must be < upper");
  }
}

void StateBox::clamp(std::span<double> x) const {
  for (std::size_t j = 0; j < x.size() && j < lower.size(); ++j) {
    x[j] = std::clamp(x[j], lower[j], upper[j]);
  }
}

std::string_view to_string(AcquisitionKind kind) {
  switch (kind) {
    case AcquisitionKind::min: return "min";
    case AcquisitionKind::gini: return "gini";
    case AcquisitionKind::entropy: return "entropy";
  }
  return "min";
}

AcquisitionKind parse_acquisition(std::string_view name) {
  if (name == "min") return AcquisitionKind::min;
  if (name == "gini") return AcquisitionKind::gini;
  if (name == "entropy") return AcquisitionKind::entropy;
  throw std::invalid_argument("unknown acquisition '" + std::string(name) + "'");
}

std::vector<Location> lhs(const StateBox& box, std::size_t count, RngStream& rng) {
  if (count == 0) throw std::invalid_argument("lhs: count must be >= 1");
  box.validate();
  const std::size_t d = box.dim();
  std::vector<Location> points(count, Location(d));
  std::vector<std::size_t> perm(count);
  for (std::size_t j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = count - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.below(i + 1)]);
    }
    const double width = box.upper[j] - box.lower[j];
    for (std::size_t i = 0; i < count; ++i) {
      const double u = (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(count);
      double v = box.lower[j] + u * width;
      if (box.integer[j]) v = std::clamp(std::round(v), box.lower[j], box.upper[j]);
      points[i][j] = v;
    }
  }
  return points;
}

double boundary_probability(double qhat, double std_error, double d) {
  const double gap = std::abs(qhat - d);
  if (std_error <= 0.0) return gap == 0.0 ? 0.5 : 0.0;
  return 0.5 * std::erfc(gap / (std_error * std::sqrt(2.0)));
}

double acquisition_weight(double p, AcquisitionKind kind) {
  switch (kind) {
    case AcquisitionKind::min:
      return std::min(p, 1.0 - p);
    case AcquisitionKind::gini:
      return p * (1.0 - p);
    case AcquisitionKind::entropy: {
      auto term = [](double v) { return v > 0.0 ? -v * std::log(v) : 0.0; };
      return term(p) + term(1.0 - p);
    }
  }
  return 0.0;
}

BatchDraw sample_batch(std::span<const double> weights, std::size_t batch, RngStream& rng) {
  if (weights.empty()) throw std::invalid_argument("sample_batch: no candidates");
  BatchDraw out;
  out.indices.reserve(batch);
  std::vector<double> cumulative(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw std::invalid_argument("sample_batch: negative weight");
    total += weights[i];
    cumulative[i] = total;
  }
  if (!(total > 0.0)) {
    out.uniform_fallback = true;
    for (std::size_t b = 0; b < batch; ++b) out.indices.push_back(rng.below(weights.size()));
    return out;
  }
  for (std::size_t b = 0; b < batch; ++b) {
    const double target = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    auto idx = static_cast<std::size_t>(std::distance(cumulative.begin(), it));
    if (idx >= weights.size()) idx = weights.size() - 1;
    // Skip zero-weight entries that share the cumulative value.
    while (weights[idx] == 0.0 && idx + 1 < weights.size()) ++idx;
    while (weights[idx] == 0.0 && idx > 0) --idx;
    out.indices.push_back(idx);
  }
  return out;
}

std::vector<Location> sample_batch(std::span<const Location> candidates,
                                   std::span<const double> weights, std::size_t batch,
                                   RngStream& rng, bool* uniform_fallback) {
  if (candidates.size() != weights.size()) {
    throw std::invalid_argument("sample_batch: candidates and weights differ in length");
  }
  const BatchDraw draw = sample_batch(weights, batch, rng);
  if (uniform_fallback != nullptr) *uniform_fallback = draw.uniform_fallback;
  std::vector<Location> out;
  out.reserve(batch);
  for (auto i : draw.indices) out.push_back(candidates[i]);
  return out;
}

}  // namespace epidet
