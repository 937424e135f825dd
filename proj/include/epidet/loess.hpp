#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace epidet {

enum class KernelKind { tricube, uniform };

struct LoessConfig {
  double span = 0.4;               ///< fraction of the design used per local fit
  int degree = 1;                  ///< 0, 1 or 2
  std::size_t min_neighbors = 0;   ///< 0 means "number of basis terms"
  KernelKind kernel = KernelKind::tricube;

  bool operator==(const LoessConfig&) const = default;
};

/// Number of local basis terms for a polynomial of `degree` in `dim` inputs.
std::size_t basis_size(std::size_t dim, int degree);

struct LoessPrediction {
  double mean = 0.0;
  double std_error = 0.0;     ///< sqrt(local_sigma2) * kernel_norm
  double kernel_norm = 0.0;   ///< ||l(x)||
  double local_sigma2 = 0.0;  ///< weighted residual variance in the neighborhood
  bool degraded = false;      ///< local system was singular; degree 0 was used
};

/// Memory-based local polynomial regression with k-nearest-neighbor tricube
/// weights. Distances are measured after dividing each coordinate by its
/// sample standard deviation.
class LoessModel {
 public:
  /// inputs is N x d (d in 1..4). Throws std::invalid_argument on too few rows,
  /// non-finite data, or an invalid config.
  static LoessModel fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& responses,
                        const LoessConfig& config);

  LoessPrediction predict(std::span<const double> x) const;

  /// Dense equivalent-kernel row l(x): predict(x).mean == l(x) . responses.
  Eigen::VectorXd equivalent_kernel(std::span<const double> x) const;

  std::size_t size() const { return static_cast<std::size_t>(responses_.size()); }
  std::size_t dim() const { return dim_; }
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& responses() const { return responses_; }
  const LoessConfig& config() const { return config_; }
  const std::vector<double>& scales() const { return scales_; }
  /// Neighborhood size k = max(ceil(span * N), min_neighbors), capped at N.
  std::size_t neighborhood_size() const { return k_; }

 private:
  struct Workspace;
  LoessPrediction local_fit(std::span<const double> x, Eigen::VectorXd* kernel_out) const;

  Eigen::MatrixXd inputs_;
  Eigen::VectorXd responses_;
  LoessConfig config_;
  std::size_t dim_ = 0;
  std::size_t k_ = 0;
  std::vector<double> scales_;
  std::vector<double> scaled_;  // row-major N x d, inputs / scales
};

}  // namespace epidet
