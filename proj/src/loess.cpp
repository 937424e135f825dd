#include "epidet/loess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace epidet {
namespace {

void fill_basis(std::span<const double> u, int degree, double* out) {
  std::size_t j = 0;
  out[j++] = 1.0;
  if (degree >= 1) {
    for (double v : u) out[j++] = v;
  }
  if (degree >= 2) {
    for (std::size_t a = 0; a < u.size(); ++a) {
      for (std::size_t b = a; b < u.size(); ++b) out[j++] = u[a] * u[b];
    }
  }
}

double tricube(double ratio) {
  if (ratio >= 1.0) return 0.0;
  const double c = 1.0 - ratio * ratio * ratio;
  return c * c * c;
}

}  // namespace

std::size_t basis_size(std::size_t dim, int degree) {
  switch (degree) {
    case 0: return 1;
    case 1: return 1 + dim;
    case 2: return 1 + dim + dim * (dim + 1) / 2;
    default: throw std::invalid_argument("loess degree must be 0, 1 or 2");
  }
}

struct LoessModel::Workspace {
  std::vector<double> dist2;
  std::vector<double> sorted;
  std::vector<std::size_t> neighbors;
  std::vector<double> weights;
  std::vector<double> basis;  // neighbors x r, row-major
};

LoessModel LoessModel::fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& responses,
                           const LoessConfig& config) {
  const auto n = static_cast<std::size_t>(inputs.rows());
  const auto d = static_cast<std::size_t>(inputs.cols());
  if (d < 1 || d > 4) throw std::invalid_argument("loess: input dimension must be 1..4");
  if (static_cast<std::size_t>(responses.size()) != n) {
    throw std::invalid_argument("loess: inputs and responses differ in length");
  }
  if (!(config.span > 0.0 && config.span <= 1.0)) {
    throw std::invalid_argument("loess: span must lie in (0, 1]");
  }
  const std::size_t r = basis_size(d, config.degree);
  const std::size_t floor = config.min_neighbors == 0 ? r : config.min_neighbors;
  if (floor < r) throw std::invalid_argument("loess: min_neighbors below number of basis terms");
  if (n < floor) {
    throw std::invalid_argument("loess: " + std::to_string(n) + " samples, need at least " +
                                std::to_string(floor));
  }
  if (!inputs.allFinite() || !responses.allFinite()) {
    throw std::invalid_argument("loess: non-finite inputs or responses");
  }

  LoessModel model;
  model.inputs_ = inputs;
  model.responses_ = responses;
  model.config_ = config;
  model.config_.min_neighbors = floor;
  model.dim_ = d;
  const auto nominal =
      static_cast<std::size_t>(std::ceil(config.span * static_cast<double>(n) - 1e-9));
  model.k_ = std::min(n, std::max(nominal, floor));

  model.scales_.assign(d, 1.0);
  if (n > 1) {
    for (std::size_t j = 0; j < d; ++j) {
      const auto col = inputs.col(static_cast<Eigen::Index>(j));
      const double mean = col.mean();
      const double var = (col.array() - mean).square().sum() / static_cast<double>(n - 1);
      const double sd = std::sqrt(var);
      if (sd > 0.0 && std::isfinite(sd)) model.scales_[j] = sd;
    }
  }
  model.scaled_.resize(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      model.scaled_[i * d + j] =
          inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) / model.scales_[j];
    }
  }
  return model;
}

LoessPrediction LoessModel::local_fit(std::span<const double> x,
                                      Eigen::VectorXd* kernel_out) const {
  if (x.size() != dim_) throw std::invalid_argument("loess: query dimension mismatch");
  thread_local Workspace ws;
  const std::size_t n = size();
  const std::size_t d = dim_;

  double query[4];
  for (std::size_t j = 0; j < d; ++j) query[j] = x[j] / scales_[j];

  ws.dist2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const double* row = &scaled_[i * d];
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = row[j] - query[j];
      acc += diff * diff;
    }
    ws.dist2[i] = acc;
  }
  ws.sorted = ws.dist2;
  std::nth_element(ws.sorted.begin(), ws.sorted.begin() + static_cast<std::ptrdiff_t>(k_ - 1),
                   ws.sorted.end());
  const double max_dist2 = ws.sorted[k_ - 1];
  const double max_dist = std::sqrt(max_dist2);

  ws.neighbors.clear();
  ws.weights.clear();
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ws.dist2[i] > max_dist2) continue;
    double w = 1.0;
    if (config_.kernel == KernelKind::tricube && max_dist > 0.0) {
      w = tricube(std::sqrt(ws.dist2[i]) / max_dist);
    }
    ws.neighbors.push_back(i);
    ws.weights.push_back(w);
    weight_sum += w;
  }
  if (weight_sum <= 0.0) {
    // Every neighbor sits on the boundary sphere; average them uniformly.
    std::fill(ws.weights.begin(), ws.weights.end(), 1.0);
    weight_sum = static_cast<double>(ws.weights.size());
  }
  const std::size_t m = ws.neighbors.size();

  LoessPrediction out;
  int degree = config_.degree;
  std::size_t r = basis_size(d, degree);
  Eigen::VectorXd coef;
  Eigen::VectorXd row_weight;  // l_n = w_n * row_weight . b_n

  if (degree > 0) {
    ws.basis.resize(m * r);
    double u[4];
    for (std::size_t a = 0; a < m; ++a) {
      const double* row = &scaled_[ws.neighbors[a] * d];
      for (std::size_t j = 0; j < d; ++j) u[j] = row[j] - query[j];
      fill_basis(std::span<const double>(u, d), degree, &ws.basis[a * r]);
    }
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(r),
                                                 static_cast<Eigen::Index>(r));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(r));
    for (std::size_t a = 0; a < m; ++a) {
      const double w = ws.weights[a];
      if (w == 0.0) continue;
      const double* b = &ws.basis[a * r];
      const double wy = w * responses_[static_cast<Eigen::Index>(ws.neighbors[a])];
      for (std::size_t i = 0; i < r; ++i) {
        rhs[static_cast<Eigen::Index>(i)] += wy * b[i];
        for (std::size_t j = 0; j <= i; ++j) {
          gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += w * b[i] * b[j];
        }
      }
    }
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const auto pivots = ldlt.vectorD();
    const bool well_posed = ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                            pivots.minCoeff() > 1e-12 * pivots.cwiseAbs().maxCoeff() &&
                            ldlt.rcond() > 1e-12;
    if (well_posed) {
      coef = ldlt.solve(rhs);
      row_weight = ldlt.solve(Eigen::VectorXd::Unit(static_cast<Eigen::Index>(r), 0));
    } else {
      degree = 0;
      r = 1;
      out.degraded = true;
    }
  }
  if (degree == 0) {
    double wy = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      wy += ws.weights[a] * responses_[static_cast<Eigen::Index>(ws.neighbors[a])];
    }
    coef = Eigen::VectorXd::Constant(1, wy / weight_sum);
    row_weight = Eigen::VectorXd::Constant(1, 1.0 / weight_sum);
  }

  out.mean = coef[0];

  double norm2 = 0.0;
  double weighted_rss = 0.0;
  if (kernel_out != nullptr) *kernel_out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < m; ++a) {
    const double w = ws.weights[a];
    double fitted = coef[0];
    double lw = row_weight[0];
    if (degree > 0) {
      const double* b = &ws.basis[a * r];
      fitted = 0.0;
      lw = 0.0;
      for (std::size_t i = 0; i < r; ++i) {
        fitted += coef[static_cast<Eigen::Index>(i)] * b[i];
        lw += row_weight[static_cast<Eigen::Index>(i)] * b[i];
      }
    }
    const double l = w * lw;
    norm2 += l * l;
    const double resid = responses_[static_cast<Eigen::Index>(ws.neighbors[a])] - fitted;
    weighted_rss += w * resid * resid;
    if (kernel_out != nullptr) (*kernel_out)[static_cast<Eigen::Index>(ws.neighbors[a])] = l;
  }

  const double k = static_cast<double>(k_);
  const double dof = static_cast<double>(r) < k ? 1.0 - static_cast<double>(r) / k : 1.0;
  out.local_sigma2 = weighted_rss / (weight_sum * dof);
  out.kernel_norm = std::sqrt(norm2);
  out.std_error = std::sqrt(out.local_sigma2) * out.kernel_norm;
  return out;
}

LoessPrediction LoessModel::predict(std::span<const double> x) const {
  return local_fit(x, nullptr);
}

Eigen::VectorXd LoessModel::equivalent_kernel(std::span<const double> x) const {
  Eigen::VectorXd kernel;
  local_fit(x, &kernel);
  return kernel;
}

}  // namespace epidet
