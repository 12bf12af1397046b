#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "anchorprobe/tensor_store.hpp"

namespace anchorprobe {

struct VarianceSpectrum {
  std::size_t layer = 0;
  std::vector<double> ratios;  ///< explained-variance ratios, descending, relative to total variance
  double pc1_share = 0.0;
  bool randomized = false;
};

enum class PcaMethod { automatic, exact, randomized };

struct PcaOptions {
  PcaMethod method = PcaMethod::automatic;
  std::size_t randomized_min_dim = 512;  ///< automatic switches to randomized at D >= this
  std::size_t oversampling = 10;
  int power_iterations = 8;
  std::uint64_t seed = 42;
};

/// Explained-variance ratios of the top `n_components` principal components
/// of X (rows are samples; X is centered internally). Ratios are divided by
/// the total variance, so they sum to 1 when every component is kept. The
/// exact path takes an SVD of the centered data; the randomized path uses a
/// seeded Gaussian range finder with power iterations.
/// Throws DomainError for N < 2 and DegenerateError for constant X.
VarianceSpectrum pca_spectrum(const Eigen::MatrixXd& x, std::size_t n_components,
                              const PcaOptions& options = {});

/// Coordinates on the top two principal axes. Throws DomainError for N < 3
/// and DegenerateError when the centered data has rank < 2.
Eigen::MatrixX2d project_2d(const Eigen::MatrixXd& x);

/// Mean silhouette coefficient with Euclidean distance. A point alone in
/// its cluster scores 0. Throws DomainError for fewer than two labels or
/// N < 3.
double silhouette(const Eigen::MatrixXd& points, std::span<const int> labels);

struct Pc1Options {
  bool include_clean = false;  ///< pool clean rows with the anchored ones
  std::size_t n_components = 10;
  PcaOptions pca;
  unsigned threads = 0;
};

/// pc1_share per layer over the selected rows (anchored rows by default;
/// all rows when the manifest has no anchored rows).
std::vector<VarianceSpectrum> pc1_trajectory(const LayerTensorSet& tensors,
                                             std::span<const SampleRecord> manifest,
                                             const Pc1Options& options = {});

}  // namespace anchorprobe
