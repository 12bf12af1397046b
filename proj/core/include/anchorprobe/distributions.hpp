#pragma once

namespace anchorprobe::stats {

double normal_cdf(double z);
/// Upper tail P(Z > z).
double normal_sf(double z);
/// log10 P(Z > z), finite far into the tail where normal_sf underflows.
double log10_normal_sf(double z);

/// Upper tail of Student's t with `df` degrees of freedom.
double t_sf(double t, double df);
/// log10 of the two-sided t tail 2·P(T > |t|).
double log10_t_two_sided(double t, double df);

/// Upper tail of the F(df1, df2) distribution.
double f_sf(double f, double df1, double df2);
double log10_f_sf(double f, double df1, double df2);

double chi_squared_sf(double x, double df);

/// P(R < w) for the range R of k iid standard normals.
double normal_range_cdf(double w, int k);

/// CDF of the studentized range distribution Q(k, df).
///
/// Computed as ∫ f(x) · P(R < q·sqrt(x/df)) dx over the χ²(df) density f,
/// with the substitution x = e^t and composite 16-point Gauss-Legendre
/// quadrature (64 panels between the 1e-14 and 1 - 1e-14 χ² quantiles).
/// The inner range probability uses the same rule over z ∈ [-8.5, 8.5].
/// Absolute error is below 1e-6 for k ≤ 50 and df ≥ 2. For df > 1e5 the
/// studentizing factor is treated as exactly 1.
double studentized_range_cdf(double q, int k, double df);
double studentized_range_sf(double q, int k, double df);

}  // namespace anchorprobe::stats
