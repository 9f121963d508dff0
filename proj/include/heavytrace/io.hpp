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

#ifndef HEAVYTRACE_IO_HPP
#define HEAVYTRACE_IO_HPP

// CSV and JSON renderings of analysis results.

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <system_error>

#include <nlohmann/json.hpp>

#include "heavytrace/distributions.hpp"
#include "heavytrace/estimators.hpp"
#include "heavytrace/generator.hpp"
#include "heavytrace/ingest.hpp"
#include "heavytrace/signal.hpp"

namespace heavytrace {

using json = nlohmann::ordered_json;

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return std::to_string(v);
  return std::string(buf, ptr);
}

/// JSON has no infinities; non-finite values become null.
inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// -- CSV ---------------------------------------------------------------------

inline void write_density_csv(std::ostream& out, const LogBinnedDensity& d) {
  out << "bin_left,bin_right,bin_center_geometric,count,density\n";
  for (std::size_t j = 0; j < d.bins(); ++j)
    out << format_double(d.bin_edges[j]) << ',' << format_double(d.bin_edges[j + 1]) << ','
        << format_double(d.geometric_center(j)) << ',' << d.counts[j] << ','
        << format_double(d.densities[j]) << '\n';
}

inline void write_ccdf_csv(std::ostream& out, const SizeCCDF& c) {
  out << "size,n_gt\n";
  for (const auto& p : c.points) out << p.size << ',' << p.n_gt << '\n';
}

inline void write_autocorrelation_csv(std::ostream& out, const Autocorrelation& ac) {
  out << "lag,a_tau\n";
  for (std::size_t tau = 0; tau < ac.values.size(); ++tau)
    out << tau << ',' << format_double(ac.values[tau]) << '\n';
}

inline void write_spectrum_csv(std::ostream& out, const PowerSpectrum& ps) {
  out << "freq_hz,power\n";
  for (std::size_t i = 0; i < ps.freqs.size(); ++i)
    out << format_double(ps.freqs[i]) << ',' << format_double(ps.power[i]) << '\n';
}

// -- JSON --------------------------------------------------------------------

inline json to_json(const SummaryStats& s) {
  return {{"n_users", s.n_users},         {"n_users_gt3", s.n_users_gt3},
          {"n_requests", s.n_requests},   {"mean_size", s.mean_size},
          {"mean_interval", s.mean_interval}, {"min_resolution", s.min_resolution}};
}

inline json to_json(const RateEntry& r) {
  return {{"threshold", r.threshold},
          {"n_gt", r.n_gt},
          {"span", r.span},
          {"rate", r.rate},
          {"mean_interval", r.mean_interval}};
}

inline json to_json(const RateTable& t) {
  json entries = json::array();
  for (const auto& r : t) entries.push_back(to_json(r));
  return {{"entries", entries}};
}

inline json to_json(const QExpFit& f) {
  return {{"model", "q_exponential"},
          {"params",
           {{"s_star", f.s_star}, {"gamma_minus_1", f.gamma_minus_1}, {"prefactor", f.prefactor}}},
          {"std_errors",
           {{"s_star", finite_or_null(f.std_errors.s_star)},
            {"gamma_minus_1", finite_or_null(f.std_errors.gamma_minus_1)},
            {"prefactor", finite_or_null(f.std_errors.prefactor)}}},
          {"fit_range", {f.fit_range.lo, f.fit_range.hi}},
          {"residual", f.residual},
          {"n_points", f.n_points},
          {"iterations", f.iterations},
          {"converged", f.converged}};
}

inline json to_json(const LogNormalFit& f) {
  return {{"model", "lognormal"},
          {"params", {{"m", f.m}, {"sigma", f.sigma}}},
          {"std_errors", {{"m", f.se_m}, {"sigma", f.se_sigma}}},
          {"fit_range", nullptr},
          {"residual", f.residual},
          {"n_points", f.n}};
}

inline json to_json(const SlopeFit& f) {
  return {{"model", "power_law"},
          {"params", {{"exponent", f.exponent}, {"intercept", f.intercept}}},
          {"std_errors", {{"exponent", f.std_error}}},
          {"fit_range", {f.fit_range.lo, finite_or_null(f.fit_range.hi)}},
          {"residual", f.residual},
          {"n_points", f.n_points},
          {"r_squared", f.r_squared}};
}

inline json to_json(const CollapseScore& c) {
  return {{"score", c.score},
          {"common_support", {c.support_lo, c.support_hi}},
          {"n_common_bins", c.n_common_bins}};
}

inline json to_json(const GeneratorConfig& c) {
  json j = {{"n_streams", c.n_streams}, {"k", c.k},         {"a", c.a},
            {"b", c.b},                 {"warmup", c.warmup}, {"horizon", c.horizon},
            {"seed", c.seed},           {"size_model", nullptr}};
  if (c.size_model)
    j["size_model"] = {{"s_star", c.size_model->s_star},
                       {"gamma_minus_1", c.size_model->gamma_minus_1}};
  return j;
}

/// Reads a generator config. Missing keys keep their defaults; unknown keys
/// are rejected.
inline GeneratorConfig generator_config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("generator config must be a JSON object");
  GeneratorConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "n_streams") c.n_streams = value.get<std::uint64_t>();
    else if (key == "k") c.k = value.get<double>();
    else if (key == "a") c.a = value.get<double>();
    else if (key == "b") c.b = value.get<double>();
    else if (key == "warmup") c.warmup = value.get<double>();
    else if (key == "horizon") c.horizon = value.get<double>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "size_model") {
      if (value.is_null()) {
        c.size_model.reset();
      } else {
        SizeModel m;
        m.s_star = value.at("s_star").get<double>();
        m.gamma_minus_1 = value.at("gamma_minus_1").get<double>();
        c.size_model = m;
      }
    } else {
      throw std::invalid_argument("generator config: unknown key '" + key + "'");
    }
  }
  return c;
}

}  // namespace heavytrace

#endif  // HEAVYTRACE_IO_HPP
