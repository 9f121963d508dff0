/*
 * Copyright (c) The heavytrace Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef HEAVYTRACE_ESTIMATORS_HPP
#define HEAVYTRACE_ESTIMATORS_HPP

// Parametric fits: the modified power law (q-exponential) for the size
// CCDF, the log-normal scaling function, and power-law slopes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heavytrace/distributions.hpp"
#include "heavytrace/error.hpp"
#include "heavytrace/random.hpp"

namespace heavytrace {

// ---------------------------------------------------------------------------
// Power-law slopes

struct FitRange {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
};

/// ln y = intercept - exponent * ln x over fit_range.
struct SlopeFit {
  double exponent = 0.0;
  double intercept = 0.0;
  FitRange fit_range;
  double std_error = 0.0;
  double r_squared = 0.0;
  double residual = 0.0;  // mean squared residual in log space
  std::size_t n_points = 0;
};

/// Ordinary least squares of ln y on ln x for the points with
/// range.lo <= x <= range.hi. The exponent is the negated slope, so
/// y ~ x^-alpha reports alpha.
inline SlopeFit fit_slope(std::span<const double> x, std::span<const double> y, FitRange range) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_slope: x and y differ in length");
  if (!(range.lo < range.hi)) throw std::invalid_argument("fit_slope: empty fit range");

  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < range.lo || x[i] > range.hi) continue;
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("fit_slope: x and y must be positive inside the fit range");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const std::size_t n = lx.size();
  if (n < 5)
    throw InsufficientDataError("fit_slope: " + std::to_string(n) +
                                " points in range, need at least 5");

  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = lx[i] - mx;
    const double dy = ly[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw InsufficientDataError("fit_slope: all x values coincide");

  const double slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - my - slope * (lx[i] - mx);
    rss += r * r;
  }

  SlopeFit fit;
  fit.exponent = -slope;
  fit.intercept = my - slope * mx;
  fit.fit_range = range;
  fit.n_points = n;
  fit.residual = rss / static_cast<double>(n);
  fit.std_error = n > 2 ? std::sqrt(rss / static_cast<double>(n - 2) / sxx) : 0.0;
  fit.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  return fit;
}

/// Slope of a log-binned density against geometric bin centers, using bins
/// with at least min_count counts.
inline SlopeFit fit_density_slope(const LogBinnedDensity& d, FitRange range,
                                  std::size_t min_count = 20) {
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t j = 0; j < d.bins(); ++j) {
    if (d.counts[j] < min_count) continue;
    x.push_back(d.geometric_center(j));
    y.push_back(d.densities[j]);
  }
  return fit_slope(x, y, range);
}

// ---------------------------------------------------------------------------
// Log-normal scaling function

/// g(x) = exp(-(ln x - m)^2 / (2 sigma^2)) / (sqrt(2 pi) sigma x)
inline double lognormal_density(double x, double m, double sigma) {
  if (!(x > 0.0)) return 0.0;
  const double z = (std::log(x) - m) / sigma;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma * x);
}

inline double lognormal_cdf(double x, double m, double sigma) {
  if (!(x > 0.0)) return 0.0;
  return 0.5 * std::erfc(-(std::log(x) - m) / (sigma * std::numbers::sqrt2));
}

struct LogNormalFit {
  double m = 0.0;
  double sigma = 0.0;
  double se_m = 0.0;
  double se_sigma = 0.0;
  double residual = 0.0;  // Kolmogorov-Smirnov distance to the fitted law
  std::size_t n = 0;
};

/// Maximum-likelihood log-normal: m = mean(ln x), sigma = population
/// standard deviation of ln x, se(m) = sigma / sqrt(n),
/// se(sigma) = sigma / sqrt(2 n).
inline LogNormalFit fit_lognormal(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 100)
    throw InsufficientDataError("fit_lognormal: " + std::to_string(n) +
                                " samples, need at least 100");
  std::vector<double> logs;
  logs.reserve(n);
  for (double x : samples) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw std::invalid_argument("fit_lognormal: samples must be positive and finite");
    logs.push_back(std::log(x));
  }
  if (std::all_of(samples.begin(), samples.end(), [&](double v) { return v == samples[0]; }))
    throw FitError("fit_lognormal: all samples are equal, sigma would be 0");

  double mean = 0.0;
  for (double v : logs) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : logs) ss += (v - mean) * (v - mean);
  const double sigma = std::sqrt(ss / static_cast<double>(n));
  if (!(sigma > 0.0)) throw FitError("fit_lognormal: zero variance");

  LogNormalFit fit;
  fit.m = mean;
  fit.sigma = sigma;
  fit.n = n;
  fit.se_m = sigma / std::sqrt(static_cast<double>(n));
  fit.se_sigma = sigma / std::sqrt(2.0 * static_cast<double>(n));

  std::sort(logs.begin(), logs.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = 0.5 * std::erfc(-(logs[i] - mean) / (sigma * std::numbers::sqrt2));
    ks = std::max({ks, f - static_cast<double>(i) / static_cast<double>(n),
                   static_cast<double>(i + 1) / static_cast<double>(n) - f});
  }
  fit.residual = ks;
  return fit;
}

inline LogNormalFit fit_lognormal(const IntervalSet& set) { return fit_lognormal(set.intervals); }

// ---------------------------------------------------------------------------
// Modified power law N(>S) = prefactor (1 + S / s_star)^-(gamma - 1)

struct QExpFit {
  double s_star = 0.0;
  double gamma_minus_1 = 0.0;
  double prefactor = 0.0;
  struct Errors {
    double s_star = 0.0;
    double gamma_minus_1 = 0.0;
    double prefactor = 0.0;
  } std_errors;
  double residual = 0.0;  // mean squared log residual
  std::size_t n_points = 0;
  std::size_t iterations = 0;
  bool converged = false;
  FitRange fit_range;     // sizes spanned by the fitted points

  double evaluate(double s) const {
    return prefactor * std::pow(1.0 + s / s_star, -gamma_minus_1);
  }
};

struct QExpOptions {
  double points_per_decade = 20.0;
  // CCDF points need at least max(min_tail_count, min_tail_fraction * N(>0))
  // events above them; sparser tail points carry large Poisson noise.
  std::size_t min_tail_count = 10;
  double min_tail_fraction = 0.01;
  std::size_t max_iterations = 200;
  double tolerance = 1e-9;          // on ln s_star
  bool require_convergence = true;
};

namespace detail {

struct QExpProfile {
  std::vector<double> s;
  std::vector<double> y;  // ln N(>s)

  struct Linear {
    double log_prefactor = 0.0;
    double gamma_minus_1 = 0.0;
    double rss = std::numeric_limits<double>::infinity();
  };

  /// Best (ln prefactor, gamma - 1) for a fixed ln s_star: a linear least
  /// squares problem in z = ln(1 + s / s_star).
  Linear solve(double log_s_star) const {
    const double s_star = std::exp(log_s_star);
    const std::size_t n = s.size();
    std::vector<double> z(n);
    double mz = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = std::log1p(s[i] / s_star);
      mz += z[i];
      my += y[i];
    }
    mz /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double szz = 0.0;
    double szy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      szz += (z[i] - mz) * (z[i] - mz);
      szy += (z[i] - mz) * (y[i] - my);
    }
    Linear out;
    if (!(szz > 0.0)) return out;
    out.gamma_minus_1 = -szy / szz;
    out.log_prefactor = my + out.gamma_minus_1 * mz;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - (out.log_prefactor - out.gamma_minus_1 * z[i]);
      rss += r * r;
    }
    out.rss = rss;
    return out;
  }
};

}  // namespace detail

/// Fits N(>S) = prefactor (1 + S / s_star)^-(gamma - 1) to a size CCDF by
/// least squares on ln N(>S).
///
/// The CCDF is sampled at options.points_per_decade log-spaced sizes from
/// the smallest positive size up to the largest size that still has
/// max(options.min_tail_count, options.min_tail_fraction * N(>0)) events
/// above it. For fixed ln s_star the other two parameters solve a linear
/// problem, so the search is one-dimensional: a coarse scan followed by
/// golden-section refinement (each refinement step is one iteration). Standard errors come from the Gauss-Newton
/// covariance sigma^2 (J^T J)^-1 in (ln prefactor, ln s_star, gamma - 1),
/// mapped to s_star and prefactor by the delta method.
///
/// Throws InsufficientDataError when fewer than 10 distinct sizes or less
/// than two decades are available, and FitError when the refinement does
/// not converge within max_iterations (unless require_convergence is false)
/// or the fitted exponent is not positive.
inline QExpFit fit_q_exponential(const SizeCCDF& ccdf, const QExpOptions& options = {}) {
  if (!(options.points_per_decade > 0.0))
    throw std::invalid_argument("fit_q_exponential: points_per_decade must be > 0");

  if (!(options.min_tail_fraction >= 0.0 && options.min_tail_fraction < 1.0))
    throw std::invalid_argument("fit_q_exponential: min_tail_fraction must be in [0, 1)");
  const auto tail_floor = std::max<std::size_t>(
      options.min_tail_count,
      static_cast<std::size_t>(std::ceil(options.min_tail_fraction * static_cast<double>(ccdf.total))));
  std::size_t n_positive = 0;
  double s_lo = 0.0;
  double s_hi = 0.0;
  for (const auto& p : ccdf.points) {
    if (p.size == 0) continue;
    ++n_positive;
    if (s_lo == 0.0) s_lo = static_cast<double>(p.size);
    if (p.n_gt >= tail_floor) s_hi = static_cast<double>(p.size);
  }
  if (n_positive < 10)
    throw InsufficientDataError("fit_q_exponential: " + std::to_string(n_positive) +
                                " distinct positive sizes, need at least 10");
  if (!(s_hi >= 100.0 * s_lo))
    throw InsufficientDataError("fit_q_exponential: sizes span less than two decades");

  detail::QExpProfile prof;
  const double step = std::pow(10.0, 1.0 / options.points_per_decade);
  for (double s = s_lo; s <= s_hi * (1.0 + 1e-12); s *= step) {
    const auto n = ccdf.n_greater(s);
    if (n == 0) break;
    prof.s.push_back(s);
    prof.y.push_back(std::log(static_cast<double>(n)));
  }
  if (prof.s.size() < 5) throw InsufficientDataError("fit_q_exponential: too few CCDF points");

  // Coarse scan of ln s_star.
  const double t_lo = std::log(s_lo) - std::log(1e6);
  const double t_hi = std::log(s_hi) + std::log(10.0);
  constexpr int kScan = 64;
  const double dt = (t_hi - t_lo) / kScan;
  double best_t = t_lo;
  auto best = prof.solve(best_t);
  for (int i = 1; i <= kScan; ++i) {
    const double t = t_lo + dt * i;
    const auto cur = prof.solve(t);
    if (cur.rss < best.rss) {
      best = cur;
      best_t = t;
    }
  }

  // Golden-section refinement around the best scan point. The best point
  // seen so far is kept, so more iterations never increase the residual.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::max(t_lo, best_t - dt);
  double hi = std::min(t_hi, best_t + dt);
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  auto f1 = prof.solve(x1);
  auto f2 = prof.solve(x2);
  auto consider = [&](double t, const detail::QExpProfile::Linear& v) {
    if (v.rss < best.rss) {
      best = v;
      best_t = t;
    }
  };
  consider(x1, f1);
  consider(x2, f2);
  std::size_t iter = 0;
  bool converged = false;
  while (iter < options.max_iterations) {
    if (hi - lo <= options.tolerance * (1.0 + std::abs(best_t))) {
      converged = true;
      break;
    }
    ++iter;
    if (f1.rss <= f2.rss) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = prof.solve(x1);
      consider(x1, f1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = prof.solve(x2);
      consider(x2, f2);
    }
  }
  if (!converged && hi - lo <= options.tolerance * (1.0 + std::abs(best_t))) converged = true;

  if (!converged && options.require_convergence) {
    std::ostringstream msg;
    msg << "fit_q_exponential: no convergence after " << iter << " iterations (ln s_star in ["
        << lo << ", " << hi << "], best rss " << best.rss << ")";
    throw FitError(msg.str());
  }
  if (!(best.gamma_minus_1 > 0.0)) {
    std::ostringstream msg;
    msg << "fit_q_exponential: fitted gamma - 1 = " << best.gamma_minus_1 << " is not positive";
    throw FitError(msg.str());
  }

  QExpFit fit;
  fit.s_star = std::exp(best_t);
  fit.gamma_minus_1 = best.gamma_minus_1;
  fit.prefactor = std::exp(best.log_prefactor);
  fit.n_points = prof.s.size();
  fit.residual = best.rss / static_cast<double>(prof.s.size());
  fit.iterations = iter;
  fit.converged = converged;
  fit.fit_range = {prof.s.front(), prof.s.back()};

  const std::size_t n = prof.s.size();
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = prof.s[i] / fit.s_star;
    const auto row = static_cast<Eigen::Index>(i);
    jac(row, 0) = 1.0;
    jac(row, 1) = fit.gamma_minus_1 * u / (1.0 + u);
    jac(row, 2) = -std::log1p(u);
  }
  const Eigen::Matrix3d jtj = jac.transpose() * jac;
  const double dof = n > 3 ? static_cast<double>(n - 3) : 1.0;
  const double sigma2 = best.rss / dof;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(jtj);
  if (lu.isInvertible()) {
    const Eigen::Matrix3d cov = sigma2 * lu.inverse();
    fit.std_errors.prefactor = fit.prefactor * std::sqrt(std::max(0.0, cov(0, 0)));
    fit.std_errors.s_star = fit.s_star * std::sqrt(std::max(0.0, cov(1, 1)));
    fit.std_errors.gamma_minus_1 = std::sqrt(std::max(0.0, cov(2, 2)));
  } else {
    const double inf = std::numeric_limits<double>::infinity();
    fit.std_errors = {inf, inf, inf};
  }
  return fit;
}

/// As fit_q_exponential on the CCDF of `sizes`, with standard errors
/// replaced by the spread of n_boot resampled refits. Replicates whose fit
/// fails are skipped; at least two must succeed.
inline QExpFit fit_q_exponential_bootstrap(std::span<const Bytes> sizes, std::size_t n_boot,
                                           std::uint64_t seed, const QExpOptions& options = {}) {
  if (n_boot < 2) throw std::invalid_argument("fit_q_exponential_bootstrap: n_boot must be >= 2");
  QExpFit fit = fit_q_exponential(size_ccdf(sizes), options);

  auto eng = make_substream(seed, 0xB007ULL);
  std::vector<double> s_star;
  std::vector<double> gamma;
  std::vector<double> prefactor;
  std::vector<Bytes> resample(sizes.size());
  for (std::size_t b = 0; b < n_boot; ++b) {
    for (auto& v : resample) v = sizes[uniform_below(eng, sizes.size())];
    try {
      const auto rep = fit_q_exponential(size_ccdf(resample), options);
      s_star.push_back(rep.s_star);
      gamma.push_back(rep.gamma_minus_1);
      prefactor.push_back(rep.prefactor);
    } catch (const Error&) {
    }
  }
  if (s_star.size() < 2) throw FitError("fit_q_exponential_bootstrap: too few replicates converged");

  auto sd = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
  };
  fit.std_errors = {sd(s_star), sd(gamma), sd(prefactor)};
  return fit;
}

}  // namespace heavytrace

#endif  // HEAVYTRACE_ESTIMATORS_HPP
