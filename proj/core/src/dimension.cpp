#include "anchorprobe/dimension.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "anchorprobe/error.hpp"
#include "anchorprobe/parallel.hpp"
#include "anchorprobe/rng.hpp"

namespace anchorprobe {

namespace {

Eigen::MatrixXd centered(const Eigen::MatrixXd& x) { return x.rowwise() - x.colwise().mean(); }

Eigen::VectorXd randomized_singular_values(const Eigen::MatrixXd& xc, std::size_t k,
                                           const PcaOptions& options) {
  const Eigen::Index sketch = std::min<Eigen::Index>(
      static_cast<Eigen::Index>(k + options.oversampling), std::min(xc.rows(), xc.cols()));
  auto rng = CounterRng::keyed(options.seed, "pca/randomized");
  Eigen::MatrixXd omega(xc.cols(), sketch);
  for (Eigen::Index j = 0; j < sketch; ++j) {
    for (Eigen::Index i = 0; i < xc.cols(); ++i) omega(i, j) = rng.normal();
  }
  auto orthonormal = [](const Eigen::MatrixXd& m) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  };
  Eigen::MatrixXd q = orthonormal(xc * omega);
  for (int it = 0; it < options.power_iterations; ++it) {
    q = orthonormal(xc.transpose() * q);
    q = orthonormal(xc * q);
  }
  const Eigen::MatrixXd b = q.transpose() * xc;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
  return svd.singularValues();
}

}  // namespace

VarianceSpectrum pca_spectrum(const Eigen::MatrixXd& x, std::size_t n_components, const PcaOptions& options) {
  if (x.rows() < 2) throw DomainError("PCA needs at least two rows");
  if (n_components == 0) throw DomainError("PCA needs n_components >= 1");
  if (!x.allFinite()) throw DomainError("PCA: non-finite values");
  const Eigen::MatrixXd xc = centered(x);
  const double total = xc.squaredNorm();
  const double scale = x.cwiseAbs().maxCoeff();
  if (!(total > 1e-24 * std::max(1.0, scale * scale) * static_cast<double>(x.size()))) {
    throw DegenerateError("PCA: data are constant");
  }
  const std::size_t max_rank = static_cast<std::size_t>(std::min(xc.rows(), xc.cols()));
  const std::size_t k = std::min(n_components, max_rank);

  bool randomized = options.method == PcaMethod::randomized ||
                    (options.method == PcaMethod::automatic &&
                     static_cast<std::size_t>(xc.cols()) >= options.randomized_min_dim &&
                     k + options.oversampling < max_rank);
  Eigen::VectorXd sv;
  if (randomized) {
    sv = randomized_singular_values(xc, k, options);
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(xc);
    sv = svd.singularValues();
  }

  VarianceSpectrum out;
  out.randomized = randomized;
  out.ratios.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double s = i < static_cast<std::size_t>(sv.size()) ? sv(static_cast<Eigen::Index>(i)) : 0.0;
    out.ratios.push_back(s * s / total);
  }
  // Guard the ordering against round-off between nearly equal values.
  for (std::size_t i = 1; i < out.ratios.size(); ++i) out.ratios[i] = std::min(out.ratios[i], out.ratios[i - 1]);
  out.pc1_share = out.ratios.front();
  return out;
}

Eigen::MatrixX2d project_2d(const Eigen::MatrixXd& x) {
  if (x.rows() < 3) throw DomainError("project_2d needs at least three rows");
  const Eigen::MatrixXd xc = centered(x);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(xc, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() < 2 || !(sv(1) > 1e-10 * std::max(1.0, sv(0)))) {
    throw DegenerateError("project_2d: data have rank < 2");
  }
  Eigen::MatrixXd axes = svd.matrixV().leftCols(2);
  // Deterministic orientation: the largest-magnitude loading of each axis is positive.
  for (Eigen::Index j = 0; j < 2; ++j) {
    Eigen::Index arg = 0;
    axes.col(j).cwiseAbs().maxCoeff(&arg);
    if (axes(arg, j) < 0) axes.col(j) *= -1.0;
  }
  return xc * axes;
}

double silhouette(const Eigen::MatrixXd& points, std::span<const int> labels) {
  const Eigen::Index n = points.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n) throw DomainError("silhouette: label count mismatch");
  if (n < 3) throw DomainError("silhouette needs at least three points");
  std::vector<int> distinct(labels.begin(), labels.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) throw DomainError("silhouette needs at least two clusters");
  std::vector<std::size_t> cluster(labels.size()), size(distinct.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    cluster[i] = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), labels[i]) - distinct.begin());
    ++size[cluster[i]];
  }
  double total = 0.0;
  std::vector<double> sums(distinct.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      sums[cluster[static_cast<std::size_t>(j)]] += (points.row(i) - points.row(j)).norm();
    }
    const std::size_t own = cluster[static_cast<std::size_t>(i)];
    if (size[own] <= 1) continue;  // s = 0
    const double a = sums[own] / static_cast<double>(size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (c != own) b = std::min(b, sums[c] / static_cast<double>(size[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

std::vector<VarianceSpectrum> pc1_trajectory(const LayerTensorSet& tensors,
                                             std::span<const SampleRecord> manifest,
                                             const Pc1Options& options) {
  tensors.validate();
  if (manifest.size() != tensors.samples()) throw ValidationError("manifest length does not match tensors");
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto c = manifest[i].condition;
    if (c == Condition::anchor || (options.include_clean && c == Condition::clean)) rows.push_back(i);
  }
  if (rows.empty()) {
    rows.resize(manifest.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  }
  std::vector<VarianceSpectrum> out(tensors.layers());
  parallel_for(tensors.layers(), options.threads, [&](std::size_t l) {
    const auto layer = tensors.layer(l);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), layer.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = layer.row(static_cast<Eigen::Index>(rows[i])).cast<double>();
    }
    out[l] = pca_spectrum(x, options.n_components, options.pca);
    out[l].layer = l;
  });
  return out;
}

}  // namespace anchorprobe
