// SPDX-License-Identifier: Apache-2.0
//
// dband-gbsm: stochastic channel synthesis and distribution fitting for D-band MIMO links
// Copyright (C) 2026 The dband-gbsm authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef GBSM_STATDIST_HPP
#define GBSM_STATDIST_HPP

#include "gbsm/random.hpp"

#include <json.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gbsm
{
    // Distribution families in loc/scale/shape standardization: for a standardized variable Z of the
    // family, the modeled variable is X = loc + scale * Z. The standard forms are
    //
    //   Normal       pdf exp(-z^2/2) / sqrt(2 pi)
    //   Exponential  pdf exp(-z), z >= 0
    //   LogNormal    Z = exp(s N(0,1))                              shape = {s}
    //   Rayleigh     pdf z exp(-z^2/2), z >= 0
    //   Rician       pdf z exp(-(z^2+b^2)/2) I0(z b), z >= 0        shape = {b}, b >= 0
    //   Nakagami     pdf 2 nu^nu z^(2nu-1) exp(-nu z^2) / Gamma(nu)  shape = {nu}
    //   Gamma        pdf z^(a-1) exp(-z) / Gamma(a)                 shape = {a}
    //   Beta         pdf z^(a-1) (1-z)^(b-1) / B(a,b), 0 <= z <= 1   shape = {a, b}
    //   LogLogistic  cdf z^c / (1 + z^c)                            shape = {c}
    //   Weibull      pdf c z^(c-1) exp(-z^c)                        shape = {c}
    //
    // This is the convention used by scipy.stats, so published loc/scale/shape triples load verbatim.
    enum class DistFamily
    {
        Normal,
        Exponential,
        LogNormal,
        Rayleigh,
        Rician,
        Nakagami,
        Gamma,
        Beta,
        LogLogistic,
        Weibull
    };

    inline constexpr std::array<DistFamily, 10> all_families = {
        DistFamily::Normal, DistFamily::Exponential, DistFamily::LogNormal, DistFamily::Rayleigh,
        DistFamily::Rician, DistFamily::Nakagami, DistFamily::Gamma, DistFamily::Beta,
        DistFamily::LogLogistic, DistFamily::Weibull};

    std::size_t shape_count(DistFamily family) noexcept;
    std::string_view family_name(DistFamily family) noexcept;

    // Accepts canonical names plus common spellings ("Log-Normal", "Log Logistic", "lognorm", "fisk", "rice", ...)
    DistFamily parse_family(std::string_view name);

    // True if the support is bounded below by loc (every family except Normal)
    bool lower_bounded(DistFamily family) noexcept;

    struct DistSpec
    {
        DistFamily family = DistFamily::Normal;
        std::vector<double> shape;
        double loc = 0.0;
        double scale = 1.0;

        bool operator==(const DistSpec &) const = default;
    };

    // Throws ParameterError on wrong shape count, non-positive scale or out-of-range shapes.
    void validate(const DistSpec &spec);

    double log_pdf(const DistSpec &spec, double x);
    double pdf(const DistSpec &spec, double x);
    double cdf(const DistSpec &spec, double x);
    double quantile(const DistSpec &spec, double p);

    // One variate from `rng`. Does not validate; call validate() once up front.
    double draw(const DistSpec &spec, RandomStream &rng);

    // n variates; element i is drawn from substream i of `seed`, so the result is reproducible
    // and independent of how the work is split.
    std::vector<double> sample(const DistSpec &spec, std::size_t n, std::uint64_t seed);

    double negative_log_likelihood(const DistSpec &spec, std::span<const double> data);

    // Maximum-likelihood estimate. With fix_loc the location is held at that value.
    // Throws UsageError (fewer than 3 points), FitError (degenerate data) or
    // DomainError (data below a fixed loc for a one-sided family).
    DistSpec fit_mle(DistFamily family, std::span<const double> data, std::optional<double> fix_loc = std::nullopt);

    struct KsResult
    {
        double statistic = 0.0;
        double p_value = 1.0;
    };

    // One-sample Kolmogorov-Smirnov test. The p-value uses the asymptotic Kolmogorov distribution of
    // sqrt(m) * statistic, without correction for parameters estimated from the same data.
    KsResult ks_test(std::span<const double> data, const DistSpec &spec);

    // P(K > lambda) for the limiting Kolmogorov distribution
    double kolmogorov_survival(double lambda);

    // Pearson correlation between sorted data and theoretical quantiles at plotting positions (i - 0.5) / m.
    double qq_correlation(std::span<const double> data, const DistSpec &spec);

    // Theoretical quantiles at the plotting positions used by qq_correlation
    std::vector<double> qq_theoretical(std::size_t m, const DistSpec &spec);

    struct GofResult
    {
        double ks_statistic = 0.0;
        double p_value = 1.0;
        double qq_correlation = 0.0;
        DistSpec fitted;
        std::size_t sample_count = 0;
    };

    GofResult evaluate_fit(std::span<const double> data, const DistSpec &spec);
    GofResult fit_and_test(DistFamily family, std::span<const double> data, std::optional<double> fix_loc = std::nullopt);

    // {"family": "...", "shape": [...], "loc": x, "scale": y}
    void to_json(nlohmann::json &j, const DistSpec &spec);
    void from_json(const nlohmann::json &j, DistSpec &spec);
}

#endif
