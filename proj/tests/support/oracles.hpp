#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Deliberately naive: enumeration, O(n²) loops, covariance eigen-decomposition.

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "anchorprobe/image.hpp"
#include "anchorprobe/stats.hpp"

namespace oracle {

using anchorprobe::stats::Alternative;

/// 1-based average ranks by direct counting.
inline std::vector<double> naive_midranks(std::span<const double> xs) {
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double below = 0, equal = 0;
    for (double y : xs) {
      if (y < xs[i]) ++below;
      if (y == xs[i]) ++equal;
    }
    r[i] = below + (equal + 1.0) / 2.0;
  }
  return r;
}

inline double tail_p(std::uint64_t le, std::uint64_t ge, std::uint64_t total, Alternative alt) {
  const double lower = static_cast<double>(le) / static_cast<double>(total);
  const double upper = static_cast<double>(ge) / static_cast<double>(total);
  switch (alt) {
    case Alternative::greater: return std::min(1.0, upper);
    case Alternative::less: return std::min(1.0, lower);
    case Alternative::two_sided: break;
  }
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

/// Signed-rank p by enumerating all 2^n sign patterns of the nonzero |d| ranks.
inline double signed_rank_p(std::span<const double> diffs, Alternative alt, double* w_plus = nullptr) {
  std::vector<double> nz;
  for (double d : diffs)
    if (d != 0) nz.push_back(d);
  std::vector<double> mags(nz.size());
  for (std::size_t i = 0; i < nz.size(); ++i) mags[i] = std::fabs(nz[i]);
  const auto ranks = naive_midranks(mags);
  std::vector<long> twice(ranks.size());
  long observed = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    twice[i] = std::lround(2 * ranks[i]);
    if (nz[i] > 0) observed += twice[i];
  }
  if (w_plus) *w_plus = observed / 2.0;
  const std::uint64_t total = std::uint64_t{1} << nz.size();
  std::uint64_t le = 0, ge = 0;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    long s = 0;
    for (std::size_t i = 0; i < nz.size(); ++i)
      if (mask >> i & 1) s += twice[i];
    if (s <= observed) ++le;
    if (s >= observed) ++ge;
  }
  return tail_p(le, ge, total, alt);
}

/// Mann-Whitney p by enumerating every way of choosing which pooled
/// observations belong to the first sample.
inline double mann_whitney_p(std::span<const double> a, std::span<const double> b, Alternative alt,
                             double* u_out = nullptr) {
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = naive_midranks(pooled);
  const std::size_t n = pooled.size(), n1 = a.size();
  std::vector<long> twice(n);
  for (std::size_t i = 0; i < n; ++i) twice[i] = std::lround(2 * ranks[i]);
  const long shift = static_cast<long>(n1 * (n1 + 1));
  long observed = -shift;
  for (std::size_t i = 0; i < n1; ++i) observed += twice[i];
  if (u_out) *u_out = observed / 2.0;

  std::uint64_t le = 0, ge = 0, total = 0;
  std::uint64_t mask = (std::uint64_t{1} << n1) - 1;
  const std::uint64_t limit = std::uint64_t{1} << n;
  while (mask < limit) {
    long s = -shift;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) s += twice[i];
    ++total;
    if (s <= observed) ++le;
    if (s >= observed) ++ge;
    if (mask == 0) break;
    // next subset of the same size (Gosper)
    const std::uint64_t c = mask & (~mask + 1);
    const std::uint64_t r = mask + c;
    mask = (((r ^ mask) >> 2) / c) | r;
  }
  return tail_p(le, ge, total, alt);
}

struct Anova {
  double f, p, eta_squared, ss_between, ss_within;
};

/// Textbook sums of squares in long double; p from Boost's F distribution.
inline Anova anova(std::span<const std::vector<double>> groups) {
  long double grand = 0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    for (double v : g) grand += v;
    n += g.size();
  }
  grand /= n;
  long double ssb = 0, ssw = 0;
  for (const auto& g : groups) {
    long double m = 0;
    for (double v : g) m += v;
    m /= g.size();
    ssb += g.size() * (m - grand) * (m - grand);
    for (double v : g) ssw += (v - m) * (v - m);
  }
  const double dfb = static_cast<double>(groups.size() - 1);
  const double dfw = static_cast<double>(n - groups.size());
  Anova out{};
  out.ss_between = static_cast<double>(ssb);
  out.ss_within = static_cast<double>(ssw);
  out.f = static_cast<double>((ssb / dfb) / (ssw / dfw));
  out.eta_squared = static_cast<double>(ssb / (ssb + ssw));
  out.p = boost::math::cdf(boost::math::complement(boost::math::fisher_f(dfb, dfw), out.f));
  return out;
}

inline double cliffs_delta(std::span<const double> a, std::span<const double> b) {
  long wins = 0;
  for (double x : a)
    for (double y : b) wins += (x > y) - (x < y);
  return static_cast<double>(wins) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

/// Eigenvalues of the sample covariance, descending, as fractions of the trace.
inline std::vector<double> covariance_ratios(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(x.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.rbegin(), ev.rend());
  const double trace = cov.trace();
  for (double& v : ev) v = std::max(v, 0.0) / trace;
  return ev;
}

inline double silhouette(const Eigen::MatrixXd& p, std::span<const int> labels) {
  const auto n = p.rows();
  double sum = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<int> ids(labels.begin(), labels.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    double a = 0, b = INFINITY;
    for (int c : ids) {
      double d = 0;
      int cnt = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (labels[j] != c || j == i) continue;
        d += (p.row(i) - p.row(j)).norm();
        ++cnt;
      }
      if (c == labels[i]) {
        if (cnt == 0) { a = NAN; break; }
        a = d / cnt;
      } else if (cnt > 0) {
        b = std::min(b, d / cnt);
      }
    }
    if (std::isnan(a)) continue;  // singleton contributes 0
    sum += (b - a) / std::max(a, b);
  }
  return sum / static_cast<double>(n);
}

/// Variance of the 4-neighbour Laplacian of the luma channel.
inline double laplacian_variance(const anchorprobe::RgbImage& img) {
  auto luma = [&](int x, int y) {
    return 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
  };
  std::vector<double> lap;
  for (int y = 1; y + 1 < img.height; ++y)
    for (int x = 1; x + 1 < img.width; ++x)
      lap.push_back(luma(x - 1, y) + luma(x + 1, y) + luma(x, y - 1) + luma(x, y + 1) - 4 * luma(x, y));
  const double m = std::accumulate(lap.begin(), lap.end(), 0.0) / lap.size();
  double v = 0;
  for (double l : lap) v += (l - m) * (l - m);
  return v / lap.size();
}

inline double mse(const anchorprobe::RgbImage& a, const anchorprobe::RgbImage& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = double(a.pixels[i]) - double(b.pixels[i]);
    s += d * d;
  }
  return s / a.pixels.size();
}

/// Ridge on standardized features by plain gradient descent, for comparison
/// with the closed form. Returns (weights, intercept).
inline std::pair<Eigen::VectorXd, double> ridge_gd(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                                                   double lambda, int iterations) {
  const Eigen::VectorXd yc = y.array() - y.mean();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(z.cols());
  // step 1/L with L the largest eigenvalue of ZᵀZ + λI
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(z.transpose() * z);
  const double step = 1.0 / (es.eigenvalues().maxCoeff() + lambda);
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd g = z.transpose() * (z * w - yc) + lambda * w;
    w -= step * g;
  }
  return {w, y.mean()};
}

}  // namespace oracle
