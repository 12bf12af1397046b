#include "anchorprobe/distributions.hpp"

#include <algorithm>
#include <array>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "anchorprobe/error.hpp"

namespace anchorprobe::stats {

namespace {

// 16-point Gauss-Legendre nodes/weights on [-1, 1] (positive half).
constexpr std::array<double, 8> kGlNodes = {
    0.0950125098376374401853193, 0.2816035507792589132304605, 0.4580167776572273863424194,
    0.6178762444026437484466718, 0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
constexpr std::array<double, 8> kGlWeights = {
    0.1894506104550684962853967, 0.1826034150449235888667637, 0.1691565193950025381893121,
    0.1495959888165767320815017, 0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

template <typename F>
double gauss_legendre(F&& f, double lo, double hi, int panels) {
  const double width = (hi - lo) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * width;
    const double half = 0.5 * width;
    double acc = 0.0;
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
      const double dx = half * kGlNodes[i];
      acc += kGlWeights[i] * (f(mid - dx) + f(mid + dx));
    }
    total += acc * half;
  }
  return total;
}

using Policy = boost::math::policies::policy<boost::math::policies::overflow_error<
    boost::math::policies::ignore_error>, boost::math::policies::underflow_error<
    boost::math::policies::ignore_error>>;

constexpr double kInvLn10 = 1.0 / std::numbers::ln10;

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double log10_normal_sf(double z) {
  if (z < 30.0) return std::log10(normal_sf(z));
  // Mills-ratio asymptotic expansion.
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return (-0.5 * z2 - std::log(z * std::sqrt(2.0 * std::numbers::pi)) + std::log(series)) * kInvLn10;
}

double t_sf(double t, double df) {
  if (!(df > 0)) throw DomainError("t distribution needs df > 0");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  boost::math::students_t_distribution<double, Policy> dist(df);
  return boost::math::cdf(boost::math::complement(dist, t));
}

double log10_t_two_sided(double t, double df) {
  if (std::isinf(t)) return -std::numeric_limits<double>::infinity();
  boost::math::students_t_distribution<long double, Policy> dist(static_cast<long double>(df));
  const long double tail =
      boost::math::cdf(boost::math::complement(dist, static_cast<long double>(std::fabs(t))));
  return static_cast<double>(std::log10(2.0L * tail));
}

double f_sf(double f, double df1, double df2) {
  if (!(df1 > 0 && df2 > 0)) throw DomainError("F distribution needs positive df");
  if (std::isinf(f)) return 0.0;
  if (f <= 0) return 1.0;
  boost::math::fisher_f_distribution<double, Policy> dist(df1, df2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

double log10_f_sf(double f, double df1, double df2) {
  if (std::isinf(f)) return -std::numeric_limits<double>::infinity();
  if (f <= 0) return 0.0;
  boost::math::fisher_f_distribution<long double, Policy> dist(df1, df2);
  const long double tail = boost::math::cdf(boost::math::complement(dist, static_cast<long double>(f)));
  return static_cast<double>(std::log10(tail));
}

double chi_squared_sf(double x, double df) {
  if (x <= 0) return 1.0;
  boost::math::chi_squared_distribution<double, Policy> dist(df);
  return boost::math::cdf(boost::math::complement(dist, x));
}

double normal_range_cdf(double w, int k) {
  if (k < 2) throw DomainError("range distribution needs k >= 2");
  if (w <= 0) return 0.0;
  constexpr double kInvSqrt2Pi = 0.398942280401432677939946;
  auto integrand = [w, k](double z) {
    // Φ(z) - Φ(z - w) written as a difference of upper tails for z > 0.
    const double inner = z > 0 ? normal_sf(z - w) - normal_sf(z) : normal_cdf(z) - normal_cdf(z - w);
    if (inner <= 0) return 0.0;
    return kInvSqrt2Pi * std::exp(-0.5 * z * z) * std::pow(inner, k - 1);
  };
  const double p = k * gauss_legendre(integrand, -8.5, 8.5, 48);
  return std::clamp(p, 0.0, 1.0);
}

double studentized_range_cdf(double q, int k, double df) {
  if (k < 2) throw DomainError("studentized range needs k >= 2");
  if (!(df > 0)) throw DomainError("studentized range needs df > 0");
  if (q <= 0) return 0.0;
  if (std::isinf(q)) return 1.0;
  if (df > 1e5) return normal_range_cdf(q, k);

  boost::math::chi_squared_distribution<double, Policy> chi(df);
  const double x_lo = boost::math::quantile(chi, 1e-14);
  const double x_hi = boost::math::quantile(boost::math::complement(chi, 1e-14));
  const double t_lo = std::log(std::max(x_lo, std::numeric_limits<double>::min()));
  const double t_hi = std::log(x_hi);
  // log χ² density, evaluated directly to stay finite in the far left tail.
  const double log_norm = -0.5 * df * std::numbers::ln2 - std::lgamma(0.5 * df);
  auto integrand = [&](double t) {
    const double x = std::exp(t);
    const double log_density = log_norm + (0.5 * df - 1.0) * std::log(x) - 0.5 * x;
    return std::exp(log_density + t) * normal_range_cdf(q * std::sqrt(x / df), k);
  };
  const double p = gauss_legendre(integrand, t_lo, t_hi, 64);
  return std::clamp(p, 0.0, 1.0);
}

double studentized_range_sf(double q, int k, double df) {
  return std::clamp(1.0 - studentized_range_cdf(q, k, df), 0.0, 1.0);
}

}  // namespace anchorprobe::stats
