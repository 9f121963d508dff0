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

#ifndef HEAVYTRACE_SIGNAL_HPP
#define HEAVYTRACE_SIGNAL_HPP

// Dependence analysis of interval sequences and of the counts-per-second
// series: lag autocorrelation, shuffle surrogates and segmented power
// spectra.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "heavytrace/distributions.hpp"
#include "heavytrace/error.hpp"
#include "heavytrace/ingest.hpp"
#include "heavytrace/random.hpp"

namespace heavytrace {

/// a(tau) = 1/(N - tau) sum_{i=1}^{N-tau} s_i s_{i+tau}, s_i = t_i - mean(t).
/// values[0] is the biased sample variance.
struct Autocorrelation {
  std::vector<double> values;  // lags 0..tau_max
  std::size_t n = 0;

  std::size_t tau_max() const noexcept { return values.empty() ? 0 : values.size() - 1; }
};

inline Autocorrelation autocorrelation(std::span<const double> seq, std::size_t tau_max) {
  const std::size_t n = seq.size();
  if (tau_max < 1) throw std::invalid_argument("autocorrelation: tau_max must be >= 1");
  if (tau_max >= n)
    throw InsufficientDataError("autocorrelation: tau_max " + std::to_string(tau_max) +
                                " must be below sequence length " + std::to_string(n));
  double mean = 0.0;
  for (double v : seq) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = seq[i] - mean;

  Autocorrelation ac;
  ac.n = n;
  ac.values.resize(tau_max + 1);
  for (std::size_t tau = 0; tau <= tau_max; ++tau) {
    double sum = 0.0;
    for (std::size_t i = 0; i + tau < n; ++i) sum += s[i] * s[i + tau];
    ac.values[tau] = sum / static_cast<double>(n - tau);
  }
  return ac;
}

inline Autocorrelation autocorrelation(const IntervalSet& set, std::size_t tau_max) {
  return autocorrelation(set.intervals, tau_max);
}

/// Uniform random permutation (Fisher-Yates), determined by `seed`.
inline IntervalSet shuffle_intervals(const IntervalSet& set, std::uint64_t seed) {
  if (set.empty()) throw InsufficientDataError("shuffle_intervals: empty interval set");
  IntervalSet out = set;
  auto eng = make_substream(seed, 0x5AFF1EULL);
  auto& v = out.intervals;
  for (std::size_t i = v.size() - 1; i > 0; --i) std::swap(v[i], v[uniform_below(eng, i + 1)]);
  return out;
}

/// Number of events in each one-second slot starting at t0.
struct CountSeries {
  Seconds t0 = 0;
  std::vector<std::uint32_t> counts;

  std::size_t length() const noexcept { return counts.size(); }
};

/// Counts in [t0, t0 + length). Events outside the window are ignored.
inline CountSeries counts_per_second(const EventLog& log, Seconds t0, std::size_t length) {
  CountSeries cs;
  cs.t0 = t0;
  cs.counts.assign(length, 0);
  for (const auto& e : log) {
    if (e.timestamp < t0) continue;
    const auto slot = static_cast<std::size_t>(e.timestamp - t0);
    if (slot < length) ++cs.counts[slot];
  }
  return cs;
}

/// Counts from the first to the last event, zero-filled.
inline CountSeries counts_per_second(const EventLog& log) {
  if (log.empty()) throw InsufficientDataError("counts_per_second: empty log");
  return counts_per_second(log, log.events().front().timestamp,
                           static_cast<std::size_t>(log.span()) + 1);
}

namespace detail {

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

struct FftwPlanDestroy {
  void operator()(fftw_plan_s* p) const noexcept { fftw_destroy_plan(p); }
};

/// Reusable real-to-complex transform of one length.
class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    if (!in_ || !out_) throw std::bad_alloc();
    plan_.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(),
                                     reinterpret_cast<fftw_complex*>(out_.get()), FFTW_ESTIMATE));
    if (!plan_) throw std::runtime_error("fftw: could not create plan");
  }

  std::span<double> input() noexcept { return {in_.get(), n_}; }

  /// |X_k|^2 / n for k = 0..n/2 of the current input.
  void power(std::span<double> out) {
    fftw_execute(plan_.get());
    const auto* x = reinterpret_cast<const fftw_complex*>(out_.get());
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t k = 0; k <= n_ / 2; ++k)
      out[k] = (x[k][0] * x[k][0] + x[k][1] * x[k][1]) * scale;
  }

 private:
  std::size_t n_;
  std::unique_ptr<double, FftwFree> in_;
  std::unique_ptr<void, FftwFree> out_;
  std::unique_ptr<fftw_plan_s, FftwPlanDestroy> plan_;
};

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace detail

/// One-sided periodogram P_k = |X_k|^2 / L, k = 0..L/2, of a mean-subtracted
/// segment. With this normalization
///   P_0 + 2 sum_{k=1}^{L/2-1} P_k + P_{L/2} = sum (x - mean)^2
///                                           = L * (biased variance).
template <class T>
std::vector<double> segment_periodogram(std::span<const T> segment) {
  const std::size_t n = segment.size();
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("segment_periodogram: even length >= 2 required");
  detail::RealFft fft(n);
  double mean = 0.0;
  for (const auto& v : segment) mean += static_cast<double>(v);
  mean /= static_cast<double>(n);
  auto in = fft.input();
  for (std::size_t i = 0; i < n; ++i) in[i] = static_cast<double>(segment[i]) - mean;
  std::vector<double> p(n / 2 + 1);
  fft.power(p);
  return p;
}

/// Two-sided total of a one-sided periodogram from segment_periodogram.
inline double periodogram_total(std::span<const double> one_sided) {
  if (one_sided.size() < 2) return one_sided.empty() ? 0.0 : one_sided[0];
  double sum = one_sided.front() + one_sided.back();
  for (std::size_t k = 1; k + 1 < one_sided.size(); ++k) sum += 2.0 * one_sided[k];
  return sum;
}

struct PowerSpectrum {
  std::vector<double> freqs;  // Hz, geometric mean of the member frequencies
  std::vector<double> power;  // mean periodogram value in each frequency bin
  std::vector<std::size_t> n_freqs;  // raw frequencies in each bin
  std::size_t segment_length = 0;
  std::size_t n_segments = 0;
  std::size_t bins_per_decade = 0;
};

/// Segment-averaged periodogram of a series sampled once per second,
/// averaged in log-spaced frequency bins.
///
/// The series is cut into floor(N / segment_length) non-overlapping
/// segments (the remainder is ignored). Each segment is mean-subtracted and
/// transformed without a taper; |X_k|^2 / L is averaged over segments, the
/// DC term is dropped and frequencies k / L are grouped into bins
/// [10^(j/b), 10^((j+1)/b)) with b = bins_per_decade. Empty bins are omitted.
template <class T>
PowerSpectrum power_spectrum(std::span<const T> series, std::size_t segment_length = 1u << 20,
                             std::size_t bins_per_decade = 10) {
  if (!detail::is_power_of_two(segment_length) || segment_length < 2)
    throw std::invalid_argument("power_spectrum: segment_length must be a power of two >= 2");
  if (bins_per_decade < 1) throw std::invalid_argument("power_spectrum: bins_per_decade must be >= 1");
  const std::size_t n_segments = series.size() / segment_length;
  if (n_segments == 0)
    throw InsufficientDataError("power_spectrum: series of length " + std::to_string(series.size()) +
                                " is shorter than one segment (" + std::to_string(segment_length) +
                                ")");

  const std::size_t half = segment_length / 2;
  detail::RealFft fft(segment_length);
  std::vector<double> raw(half + 1, 0.0);
  std::vector<double> seg_power(half + 1);
  for (std::size_t s = 0; s < n_segments; ++s) {
    const auto seg = series.subspan(s * segment_length, segment_length);
    double mean = 0.0;
    for (const auto& v : seg) mean += static_cast<double>(v);
    mean /= static_cast<double>(segment_length);
    auto in = fft.input();
    for (std::size_t i = 0; i < segment_length; ++i) in[i] = static_cast<double>(seg[i]) - mean;
    fft.power(seg_power);
    for (std::size_t k = 0; k <= half; ++k) raw[k] += seg_power[k];
  }
  for (auto& v : raw) v /= static_cast<double>(n_segments);

  PowerSpectrum ps;
  ps.segment_length = segment_length;
  ps.n_segments = n_segments;
  ps.bins_per_decade = bins_per_decade;

  const double bpd = static_cast<double>(bins_per_decade);
  const double inv_len = 1.0 / static_cast<double>(segment_length);
  long long current = std::numeric_limits<long long>::min();
  double sum_p = 0.0;
  double sum_logf = 0.0;
  std::size_t members = 0;
  auto flush = [&] {
    if (members == 0) return;
    ps.freqs.push_back(std::exp(sum_logf / static_cast<double>(members)));
    ps.power.push_back(sum_p / static_cast<double>(members));
    ps.n_freqs.push_back(members);
    sum_p = sum_logf = 0.0;
    members = 0;
  };
  for (std::size_t k = 1; k <= half; ++k) {
    const double f = static_cast<double>(k) * inv_len;
    const auto bin = static_cast<long long>(std::floor(std::log10(f) * bpd + 1e-9));
    if (bin != current) {
      flush();
      current = bin;
    }
    sum_p += raw[k];
    sum_logf += std::log(f);
    ++members;
  }
  flush();
  return ps;
}

inline PowerSpectrum power_spectrum(const CountSeries& series, std::size_t segment_length = 1u << 20,
                                    std::size_t bins_per_decade = 10) {
  return power_spectrum(std::span<const std::uint32_t>(series.counts), segment_length,
                        bins_per_decade);
}

}  // namespace heavytrace

#endif  // HEAVYTRACE_SIGNAL_HPP
