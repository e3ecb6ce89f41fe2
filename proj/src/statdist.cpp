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

#include "gbsm/statdist.hpp"
#include "gbsm/errors.hpp"
#include "gbsm/optimize.hpp"

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace gbsm
{
    namespace
    {
        namespace bm = boost::math;
        using fast_policy = bm::policies::policy<bm::policies::promote_double<false>>;

        constexpr double pi = std::numbers::pi;
        constexpr double inf = std::numeric_limits<double>::infinity();
        constexpr double nan = std::numeric_limits<double>::quiet_NaN();
        const double log_sqrt_2pi = 0.5 * std::log(2.0 * pi);

        // Below this the Rician is evaluated as a Rayleigh; the relative error is O(b^2).
        constexpr double rician_rayleigh_limit = 1e-7;

        // a * log(z) with 0 * log(0) = 0
        inline double xlogy(double a, double z)
        {
            return a == 0.0 ? 0.0 : a * std::log(z);
        }

        inline double log_i0(double y)
        {
            y = std::abs(y);
            if (y < 700.0)
                return std::log(bm::cyl_bessel_i(0, y, fast_policy()));
            return y - 0.5 * std::log(2.0 * pi * y) + std::log1p(1.0 / (8.0 * y) + 9.0 / (128.0 * y * y));
        }

        double normal_cdf(double z)
        {
            return 0.5 * std::erfc(-z / std::numbers::sqrt2);
        }

        double normal_quantile(double p)
        {
            if (p <= 0.0)
                return -inf;
            if (p >= 1.0)
                return inf;
            return -std::numbers::sqrt2 * bm::erfc_inv(2.0 * p, fast_policy());
        }

        // Log-density of the standardized variable with the shape-only constant hoisted out of the loop.
        class StandardDensity
        {
        public:
            StandardDensity(DistFamily family, const std::vector<double> &shape) : family_(family)
            {
                if (!shape.empty())
                    s0_ = shape[0];
                if (shape.size() > 1)
                    s1_ = shape[1];
                switch (family)
                {
                case DistFamily::Normal:
                    c_ = -log_sqrt_2pi;
                    break;
                case DistFamily::LogNormal:
                    c_ = -std::log(s0_) - log_sqrt_2pi;
                    break;
                case DistFamily::Nakagami:
                    c_ = std::log(2.0) + s0_ * std::log(s0_) - std::lgamma(s0_);
                    break;
                case DistFamily::Gamma:
                    c_ = -std::lgamma(s0_);
                    break;
                case DistFamily::Beta:
                    c_ = std::lgamma(s0_ + s1_) - std::lgamma(s0_) - std::lgamma(s1_);
                    break;
                case DistFamily::LogLogistic:
                case DistFamily::Weibull:
                    c_ = std::log(s0_);
                    break;
                default:
                    break;
                }
            }

            double operator()(double z) const
            {
                switch (family_)
                {
                case DistFamily::Normal:
                    return c_ - 0.5 * z * z;
                case DistFamily::Exponential:
                    return z < 0.0 ? -inf : -z;
                case DistFamily::LogNormal:
                {
                    if (z <= 0.0)
                        return -inf;
                    const double lz = std::log(z);
                    return c_ - lz - lz * lz / (2.0 * s0_ * s0_);
                }
                case DistFamily::Rayleigh:
                    return z < 0.0 ? -inf : std::log(z) - 0.5 * z * z;
                case DistFamily::Rician:
                    if (z < 0.0)
                        return -inf;
                    return std::log(z) - 0.5 * (z * z + s0_ * s0_) + log_i0(z * s0_);
                case DistFamily::Nakagami:
                    return z < 0.0 ? -inf : c_ + xlogy(2.0 * s0_ - 1.0, z) - s0_ * z * z;
                case DistFamily::Gamma:
                    return z < 0.0 ? -inf : c_ + xlogy(s0_ - 1.0, z) - z;
                case DistFamily::Beta:
                    if (z < 0.0 || z > 1.0)
                        return -inf;
                    return c_ + xlogy(s0_ - 1.0, z) + (s1_ == 1.0 ? 0.0 : (s1_ - 1.0) * std::log1p(-z));
                case DistFamily::LogLogistic:
                {
                    if (z < 0.0)
                        return -inf;
                    if (z == 0.0)
                        return s0_ == 1.0 ? c_ : (s0_ > 1.0 ? -inf : inf);
                    const double lz = std::log(z);
                    // log(1 + z^c) evaluated without overflow for large z^c
                    const double t = s0_ * lz;
                    const double log1p_zc = t > 30.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
                    return c_ + (s0_ - 1.0) * lz - 2.0 * log1p_zc;
                }
                case DistFamily::Weibull:
                    return z < 0.0 ? -inf : c_ + xlogy(s0_ - 1.0, z) - std::pow(z, s0_);
                }
                return nan;
            }

        private:
            DistFamily family_;
            double s0_ = 0.0, s1_ = 0.0, c_ = 0.0;
        };

        double standard_cdf(DistFamily family, const std::vector<double> &shape, double z)
        {
            switch (family)
            {
            case DistFamily::Normal:
                return normal_cdf(z);
            case DistFamily::Exponential:
                return z <= 0.0 ? 0.0 : -std::expm1(-z);
            case DistFamily::LogNormal:
                return z <= 0.0 ? 0.0 : normal_cdf(std::log(z) / shape[0]);
            case DistFamily::Rayleigh:
                return z <= 0.0 ? 0.0 : -std::expm1(-0.5 * z * z);
            case DistFamily::Rician:
                if (z <= 0.0)
                    return 0.0;
                if (shape[0] < rician_rayleigh_limit)
                    return -std::expm1(-0.5 * z * z);
                return bm::cdf(bm::non_central_chi_squared_distribution<double, fast_policy>(2.0, shape[0] * shape[0]), z * z);
            case DistFamily::Nakagami:
                return z <= 0.0 ? 0.0 : bm::gamma_p(shape[0], shape[0] * z * z, fast_policy());
            case DistFamily::Gamma:
                return z <= 0.0 ? 0.0 : bm::gamma_p(shape[0], z, fast_policy());
            case DistFamily::Beta:
                if (z <= 0.0)
                    return 0.0;
                if (z >= 1.0)
                    return 1.0;
                return bm::ibeta(shape[0], shape[1], z, fast_policy());
            case DistFamily::LogLogistic:
                return z <= 0.0 ? 0.0 : 1.0 / (1.0 + std::pow(z, -shape[0]));
            case DistFamily::Weibull:
                return z <= 0.0 ? 0.0 : -std::expm1(-std::pow(z, shape[0]));
            }
            return nan;
        }

        double standard_quantile(DistFamily family, const std::vector<double> &shape, double p)
        {
            if (p <= 0.0)
                return family == DistFamily::Normal ? -inf : 0.0;
            if (p >= 1.0)
                return family == DistFamily::Beta ? 1.0 : inf;
            switch (family)
            {
            case DistFamily::Normal:
                return normal_quantile(p);
            case DistFamily::Exponential:
                return -std::log1p(-p);
            case DistFamily::LogNormal:
                return std::exp(shape[0] * normal_quantile(p));
            case DistFamily::Rayleigh:
                return std::sqrt(-2.0 * std::log1p(-p));
            case DistFamily::Rician:
            {
                if (shape[0] < rician_rayleigh_limit)
                    return std::sqrt(-2.0 * std::log1p(-p));
                const bm::non_central_chi_squared_distribution<double, fast_policy> d(2.0, shape[0] * shape[0]);
                // Polish the root with Newton steps on the cdf of z^2
                double w = bm::quantile(d, p);
                for (int i = 0; i < 3; ++i)
                {
                    const double dens = bm::pdf(d, w);
                    if (!(dens > 0.0))
                        break;
                    const double step = (bm::cdf(d, w) - p) / dens;
                    if (!std::isfinite(step) || w - step <= 0.0)
                        break;
                    w -= step;
                }
                return std::sqrt(w);
            }
            case DistFamily::Nakagami:
                return std::sqrt(bm::gamma_p_inv(shape[0], p, fast_policy()) / shape[0]);
            case DistFamily::Gamma:
                return bm::gamma_p_inv(shape[0], p, fast_policy());
            case DistFamily::Beta:
                return bm::ibeta_inv(shape[0], shape[1], p, fast_policy());
            case DistFamily::LogLogistic:
                return std::pow(p / (1.0 - p), 1.0 / shape[0]);
            case DistFamily::Weibull:
                return std::pow(-std::log1p(-p), 1.0 / shape[0]);
            }
            return nan;
        }

        double standard_draw(DistFamily family, const std::vector<double> &shape, RandomStream &rng)
        {
            switch (family)
            {
            case DistFamily::Normal:
                return rng.normal();
            case DistFamily::Exponential:
                return rng.exponential();
            case DistFamily::LogNormal:
                return std::exp(shape[0] * rng.normal());
            case DistFamily::Rayleigh:
                return std::sqrt(2.0 * rng.exponential());
            case DistFamily::Rician:
            {
                const double re = rng.normal() + shape[0];
                const double im = rng.normal();
                return std::hypot(re, im);
            }
            case DistFamily::Nakagami:
                return std::sqrt(rng.gamma(shape[0]) / shape[0]);
            case DistFamily::Gamma:
                return rng.gamma(shape[0]);
            case DistFamily::Beta:
            {
                const double x = rng.gamma(shape[0]);
                const double y = rng.gamma(shape[1]);
                return x / (x + y);
            }
            case DistFamily::LogLogistic:
            {
                const double u = rng.uniform();
                return std::pow(u / (1.0 - u), 1.0 / shape[0]);
            }
            case DistFamily::Weibull:
                return std::pow(rng.exponential(), 1.0 / shape[0]);
            }
            return nan;
        }

        std::string normalize_name(std::string_view name)
        {
            std::string out;
            for (char c : name)
                if (std::isalnum(static_cast<unsigned char>(c)))
                    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            return out;
        }

        // ---- Maximum-likelihood machinery ------------------------------------------------------

        // Penalized negative log-likelihood: points with non-finite log-density are dropped from the
        // sum and charged a large constant penalty each (same scheme as scipy's fitting routines),
        // so the optimizer sees a finite, continuous surface near the support boundary.
        double penalized_nll(const DistSpec &spec, std::span<const double> data)
        {
            static const double penalty = std::log(std::numeric_limits<double>::max()) * 100.0;
            const StandardDensity density(spec.family, spec.shape);
            const double inv_scale = 1.0 / spec.scale;
            double total = 0.0;
            std::size_t bad = 0;
            for (double x : data)
            {
                const double lp = density((x - spec.loc) * inv_scale);
                if (std::isfinite(lp))
                    total -= lp;
                else
                    ++bad;
            }
            return total + static_cast<double>(data.size()) * std::log(spec.scale) + static_cast<double>(bad) * penalty;
        }

        struct SampleMoments
        {
            double mean = 0.0, sd = 0.0;
            double mean_sq = 0.0, var_sq = 0.0;
            double mean_log = 0.0, sd_log = 0.0, median_log = 0.0;
            bool has_log = false;
        };

        SampleMoments moments_above(std::span<const double> data, double loc)
        {
            SampleMoments m;
            std::vector<double> logs;
            logs.reserve(data.size());
            double s = 0.0, s2 = 0.0, q = 0.0, q2 = 0.0;
            for (double x : data)
            {
                const double y = x - loc;
                s += y;
                s2 += y * y;
                q += y * y;
                q2 += y * y * y * y;
                if (y > 0.0)
                    logs.push_back(std::log(y));
            }
            const double n = static_cast<double>(data.size());
            m.mean = s / n;
            m.sd = std::sqrt(std::max(s2 / n - m.mean * m.mean, 0.0));
            m.mean_sq = q / n;
            m.var_sq = std::max(q2 / n - m.mean_sq * m.mean_sq, 0.0);
            if (logs.size() >= 2)
            {
                m.has_log = true;
                const double ln = static_cast<double>(logs.size());
                double ls = 0.0, ls2 = 0.0;
                for (double l : logs)
                    ls += l, ls2 += l * l;
                m.mean_log = ls / ln;
                m.sd_log = std::sqrt(std::max(ls2 / ln - m.mean_log * m.mean_log, 1e-300));
                auto mid = logs.begin() + static_cast<std::ptrdiff_t>(logs.size() / 2);
                std::nth_element(logs.begin(), mid, logs.end());
                m.median_log = *mid;
            }
            return m;
        }

        // Maps an unconstrained parameter vector onto a DistSpec whose support covers the data.
        class FitLayout
        {
        public:
            FitLayout(DistFamily family, std::span<const double> data, std::optional<double> fix_loc)
                : family_(family), fix_loc_(fix_loc)
            {
                const auto [mn, mx] = std::minmax_element(data.begin(), data.end());
                xmin_ = *mn;
                xmax_ = *mx;
                const double n = static_cast<double>(data.size());
                const double mean = std::accumulate(data.begin(), data.end(), 0.0) / n;
                double ss = 0.0;
                for (double x : data)
                    ss += (x - mean) * (x - mean);
                spread_ = std::sqrt(ss / n);
                if (!(spread_ > 0.0))
                    spread_ = std::max(std::abs(mean), 1.0);
            }

            bool free_loc() const { return !fix_loc_.has_value(); }
            bool beta() const { return family_ == DistFamily::Beta; }
            double xmin() const { return xmin_; }
            double xmax() const { return xmax_; }
            double spread() const { return spread_; }

            std::size_t dims() const
            {
                return (free_loc() ? 1 : 0) + 1 + shape_count(family_);
            }

            DistSpec decode(const std::vector<double> &t) const
            {
                DistSpec spec;
                spec.family = family_;
                std::size_t i = 0;
                if (beta())
                {
                    spec.loc = free_loc() ? xmin_ - spread_ * std::exp(t[i++]) : *fix_loc_;
                    const double upper = xmax_ + spread_ * std::exp(t[i++]);
                    spec.scale = upper - spec.loc;
                }
                else
                {
                    spec.loc = free_loc() ? xmin_ - spread_ * std::exp(t[i++]) : *fix_loc_;
                    spec.scale = spread_ * std::exp(t[i++]);
                }
                for (; i < t.size(); ++i)
                    spec.shape.push_back(std::exp(t[i]));
                return spec;
            }

            // Starting points for a given location offset (xmin - loc = delta). Several for Rician.
            std::vector<std::vector<double>> starts(std::span<const double> data, double delta) const
            {
                const double loc = free_loc() ? xmin_ - delta : *fix_loc_;
                const SampleMoments m = moments_above(data, loc);
                std::vector<std::vector<double>> out;
                auto head = [&]()
                {
                    std::vector<double> t;
                    if (free_loc())
                        t.push_back(std::log(delta / spread_));
                    return t;
                };
                auto push_scaled = [&](double scale, std::initializer_list<double> shapes)
                {
                    if (!(scale > 0.0) || !std::isfinite(scale))
                        return;
                    std::vector<double> t = head();
                    t.push_back(std::log(scale / spread_));
                    for (double s : shapes)
                    {
                        if (!(s > 0.0) || !std::isfinite(s))
                            return;
                        t.push_back(std::log(s));
                    }
                    out.push_back(std::move(t));
                };

                switch (family_)
                {
                case DistFamily::LogNormal:
                    if (m.has_log)
                        push_scaled(std::exp(m.mean_log), {std::max(m.sd_log, 1e-3)});
                    break;
                case DistFamily::Rayleigh:
                    push_scaled(std::sqrt(m.mean_sq / 2.0), {});
                    break;
                case DistFamily::Rician:
                    for (double b : {0.3, 1.0, 2.5, 6.0})
                        push_scaled(std::sqrt(m.mean_sq / (2.0 + b * b)), {b});
                    break;
                case DistFamily::Nakagami:
                {
                    const double nu = m.var_sq > 0.0 ? std::max(m.mean_sq * m.mean_sq / m.var_sq, 0.05) : 1.0;
                    push_scaled(std::sqrt(m.mean_sq), {nu});
                    break;
                }
                case DistFamily::Gamma:
                    if (m.sd > 0.0 && m.mean > 0.0)
                        push_scaled(m.sd * m.sd / m.mean, {m.mean * m.mean / (m.sd * m.sd)});
                    break;
                case DistFamily::LogLogistic:
                    if (m.has_log)
                        push_scaled(std::exp(m.median_log), {pi / (std::sqrt(3.0) * std::max(m.sd_log, 1e-3))});
                    break;
                case DistFamily::Weibull:
                    if (m.has_log)
                    {
                        const double c = pi / (std::sqrt(6.0) * std::max(m.sd_log, 1e-3));
                        push_scaled(std::exp(m.mean_log + 0.5772156649015329 / c), {c});
                    }
                    break;
                case DistFamily::Beta:
                {
                    const double upper_gap = free_loc() ? delta : 0.1 * spread_;
                    const double upper = xmax_ + upper_gap;
                    const double width = upper - loc;
                    const double zm = m.mean / width;
                    const double zv = (m.sd / width) * (m.sd / width);
                    double common = zv > 0.0 ? zm * (1.0 - zm) / zv - 1.0 : 2.0;
                    if (!(common > 0.0))
                        common = 2.0;
                    std::vector<double> t = head();
                    t.push_back(std::log(upper_gap / spread_));
                    t.push_back(std::log(std::max(zm * common, 1e-3)));
                    t.push_back(std::log(std::max((1.0 - zm) * common, 1e-3)));
                    out.push_back(std::move(t));
                    break;
                }
                default:
                    break;
                }
                return out;
            }

        private:
            DistFamily family_;
            std::optional<double> fix_loc_;
            double xmin_ = 0.0, xmax_ = 0.0, spread_ = 1.0;
        };

        DistSpec numeric_fit(DistFamily family, std::span<const double> data, std::optional<double> fix_loc)
        {
            const FitLayout layout(family, data, fix_loc);
            auto objective = [&](const std::vector<double> &t)
            {
                for (double v : t)
                    if (!std::isfinite(v) || std::abs(v) > 700.0)
                        return inf;
                const DistSpec spec = layout.decode(t);
                if (!(spec.scale > 0.0) || !std::isfinite(spec.scale))
                    return inf;
                return penalized_nll(spec, data);
            };

            std::vector<std::vector<double>> candidates;
            if (layout.free_loc())
            {
                for (double f : {1e-4, 1e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0, 3.0, 10.0})
                    for (auto &s : layout.starts(data, f * layout.spread()))
                        candidates.push_back(std::move(s));
            }
            else
            {
                for (auto &s : layout.starts(data, 0.0))
                    candidates.push_back(std::move(s));
            }
            if (candidates.empty())
                throw FitError(std::string("no starting point for ") + std::string(family_name(family)) + " fit");

            std::vector<std::pair<double, std::size_t>> ranked;
            for (std::size_t i = 0; i < candidates.size(); ++i)
                ranked.emplace_back(objective(candidates[i]), i);
            std::sort(ranked.begin(), ranked.end());

            NelderMeadOptions opts;
            opts.f_tolerance = 1e-11;
            opts.x_tolerance = 1e-8;
            opts.max_evaluations = 4000 * layout.dims();
            MinimizeResult best;
            best.value = inf;
            const std::size_t tries = std::min<std::size_t>(2, ranked.size());
            for (std::size_t k = 0; k < tries; ++k)
            {
                if (!std::isfinite(ranked[k].first))
                    continue;
                MinimizeResult r = nelder_mead(objective, candidates[ranked[k].second], opts);
                if (r.value < best.value)
                    best = std::move(r);
            }
            if (!std::isfinite(best.value))
                throw FitError(std::string(family_name(family)) + " likelihood is not finite for this data");
            DistSpec spec = layout.decode(best.x);
            validate(spec);
            return spec;
        }
    }

    std::size_t shape_count(DistFamily family) noexcept
    {
        switch (family)
        {
        case DistFamily::Normal:
        case DistFamily::Exponential:
        case DistFamily::Rayleigh:
            return 0;
        case DistFamily::Beta:
            return 2;
        default:
            return 1;
        }
    }

    std::string_view family_name(DistFamily family) noexcept
    {
        switch (family)
        {
        case DistFamily::Normal:
            return "Normal";
        case DistFamily::Exponential:
            return "Exponential";
        case DistFamily::LogNormal:
            return "LogNormal";
        case DistFamily::Rayleigh:
            return "Rayleigh";
        case DistFamily::Rician:
            return "Rician";
        case DistFamily::Nakagami:
            return "Nakagami";
        case DistFamily::Gamma:
            return "Gamma";
        case DistFamily::Beta:
            return "Beta";
        case DistFamily::LogLogistic:
            return "LogLogistic";
        case DistFamily::Weibull:
            return "Weibull";
        }
        return "?";
    }

    DistFamily parse_family(std::string_view name)
    {
        const std::string key = normalize_name(name);
        for (DistFamily f : all_families)
            if (key == normalize_name(family_name(f)))
                return f;
        if (key == "norm" || key == "gaussian")
            return DistFamily::Normal;
        if (key == "expon")
            return DistFamily::Exponential;
        if (key == "lognorm")
            return DistFamily::LogNormal;
        if (key == "rice")
            return DistFamily::Rician;
        if (key == "fisk")
            return DistFamily::LogLogistic;
        if (key == "weibullmin")
            return DistFamily::Weibull;
        throw ParameterError("unknown distribution family '" + std::string(name) + "'");
    }

    bool lower_bounded(DistFamily family) noexcept
    {
        return family != DistFamily::Normal;
    }

    void validate(const DistSpec &spec)
    {
        const std::string name(family_name(spec.family));
        if (spec.shape.size() != shape_count(spec.family))
            throw ParameterError(name + " expects " + std::to_string(shape_count(spec.family)) +
                                 " shape parameter(s), got " + std::to_string(spec.shape.size()));
        if (!std::isfinite(spec.loc))
            throw ParameterError(name + ": loc must be finite");
        if (!(spec.scale > 0.0) || !std::isfinite(spec.scale))
            throw ParameterError(name + ": scale must be positive and finite");
        for (double s : spec.shape)
        {
            if (!std::isfinite(s))
                throw ParameterError(name + ": shape parameters must be finite");
            const bool ok = spec.family == DistFamily::Rician ? s >= 0.0 : s > 0.0;
            if (!ok)
                throw ParameterError(name + (spec.family == DistFamily::Rician ? ": shape must be >= 0" : ": shape must be > 0"));
        }
    }

    double log_pdf(const DistSpec &spec, double x)
    {
        validate(spec);
        return StandardDensity(spec.family, spec.shape)((x - spec.loc) / spec.scale) - std::log(spec.scale);
    }

    double pdf(const DistSpec &spec, double x)
    {
        return std::exp(log_pdf(spec, x));
    }

    double cdf(const DistSpec &spec, double x)
    {
        validate(spec);
        if (std::isnan(x))
            return nan;
        return std::clamp(standard_cdf(spec.family, spec.shape, (x - spec.loc) / spec.scale), 0.0, 1.0);
    }

    double quantile(const DistSpec &spec, double p)
    {
        validate(spec);
        if (!(p >= 0.0 && p <= 1.0))
            throw DomainError("quantile probability must lie in [0, 1]");
        return spec.loc + spec.scale * standard_quantile(spec.family, spec.shape, p);
    }

    double draw(const DistSpec &spec, RandomStream &rng)
    {
        return spec.loc + spec.scale * standard_draw(spec.family, spec.shape, rng);
    }

    std::vector<double> sample(const DistSpec &spec, std::size_t n, std::uint64_t seed)
    {
        validate(spec);
        if (n == 0)
            throw UsageError("sample size must be at least 1");
        const RandomStream root(seed);
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            RandomStream rng = root.substream(i);
            out[i] = draw(spec, rng);
        }
        return out;
    }

    double negative_log_likelihood(const DistSpec &spec, std::span<const double> data)
    {
        validate(spec);
        const StandardDensity density(spec.family, spec.shape);
        double total = 0.0;
        for (double x : data)
            total -= density((x - spec.loc) / spec.scale);
        return total + static_cast<double>(data.size()) * std::log(spec.scale);
    }

    DistSpec fit_mle(DistFamily family, std::span<const double> data, std::optional<double> fix_loc)
    {
        if (data.size() < 3)
            throw UsageError("maximum-likelihood fit needs at least 3 data points");
        for (double x : data)
            if (!std::isfinite(x))
                throw DomainError("fit data must be finite");
        if (fix_loc && !std::isfinite(*fix_loc))
            throw ParameterError("fixed loc must be finite");

        const auto [mn, mx] = std::minmax_element(data.begin(), data.end());
        if (*mn == *mx)
            throw FitError("degenerate data: all values are equal");
        if (fix_loc && lower_bounded(family) && *mn < *fix_loc)
            throw DomainError(std::string(family_name(family)) + " support starts at loc; data lie below the fixed loc");

        const double n = static_cast<double>(data.size());
        const double mean = std::accumulate(data.begin(), data.end(), 0.0) / n;

        switch (family)
        {
        case DistFamily::Normal:
        {
            const double loc = fix_loc.value_or(mean);
            double ss = 0.0;
            for (double x : data)
                ss += (x - loc) * (x - loc);
            return {family, {}, loc, std::sqrt(ss / n)};
        }
        case DistFamily::Exponential:
        {
            const double loc = fix_loc.value_or(*mn);
            const double scale = mean - loc;
            if (!(scale > 0.0))
                throw FitError("degenerate data: all values sit at loc");
            return {family, {}, loc, scale};
        }
        case DistFamily::Rayleigh:
            if (fix_loc)
            {
                double ss = 0.0;
                for (double x : data)
                    ss += (x - *fix_loc) * (x - *fix_loc);
                return {family, {}, *fix_loc, std::sqrt(ss / (2.0 * n))};
            }
            [[fallthrough]];
        default:
            return numeric_fit(family, data, fix_loc);
        }
    }

    double kolmogorov_survival(double lambda)
    {
        if (!(lambda > 0.0))
            return 1.0;
        if (lambda < 1.18)
        {
            // Jacobi-theta form converges fast for small arguments
            const double k = pi * pi / (8.0 * lambda * lambda);
            double sum = 0.0;
            for (int j = 1; j < 100; ++j)
            {
                const double term = std::exp(-static_cast<double>((2 * j - 1) * (2 * j - 1)) * k);
                sum += term;
                if (term < 1e-17 * sum)
                    break;
            }
            return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * sum, 0.0, 1.0);
        }
        double sum = 0.0;
        for (int j = 1; j < 100; ++j)
        {
            const double term = std::exp(-2.0 * j * j * lambda * lambda);
            sum += (j % 2 == 1 ? 2.0 : -2.0) * term;
            if (term < 1e-300 || term < 1e-17 * std::abs(sum))
                break;
        }
        return std::clamp(sum, 0.0, 1.0);
    }

    KsResult ks_test(std::span<const double> data, const DistSpec &spec)
    {
        if (data.empty())
            throw UsageError("KS test needs at least one data point");
        validate(spec);
        std::vector<double> sorted(data.begin(), data.end());
        std::sort(sorted.begin(), sorted.end());
        const double m = static_cast<double>(sorted.size());
        double d = 0.0;
        for (std::size_t i = 0; i < sorted.size(); ++i)
        {
            const double f = std::clamp(standard_cdf(spec.family, spec.shape, (sorted[i] - spec.loc) / spec.scale), 0.0, 1.0);
            d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
        }
        return {d, kolmogorov_survival(std::sqrt(m) * d)};
    }

    std::vector<double> qq_theoretical(std::size_t m, const DistSpec &spec)
    {
        validate(spec);
        std::vector<double> q(m);
        for (std::size_t i = 0; i < m; ++i)
            q[i] = spec.loc + spec.scale * standard_quantile(spec.family, spec.shape, (static_cast<double>(i) + 0.5) / static_cast<double>(m));
        return q;
    }

    double qq_correlation(std::span<const double> data, const DistSpec &spec)
    {
        if (data.size() < 3)
            throw UsageError("Q-Q correlation needs at least 3 data points");
        std::vector<double> sorted(data.begin(), data.end());
        std::sort(sorted.begin(), sorted.end());
        const std::vector<double> q = qq_theoretical(sorted.size(), spec);

        const double n = static_cast<double>(sorted.size());
        const double mx = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
        const double my = std::accumulate(q.begin(), q.end(), 0.0) / n;
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < sorted.size(); ++i)
        {
            const double dx = sorted[i] - mx, dy = q[i] - my;
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
        if (!(sxx > 0.0) || !(syy > 0.0) || !std::isfinite(sxx * syy))
            throw DomainError("Q-Q correlation is undefined for zero-variance data");
        return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    }

    GofResult evaluate_fit(std::span<const double> data, const DistSpec &spec)
    {
        GofResult r;
        const KsResult ks = ks_test(data, spec);
        r.ks_statistic = ks.statistic;
        r.p_value = ks.p_value;
        r.qq_correlation = qq_correlation(data, spec);
        r.fitted = spec;
        r.sample_count = data.size();
        return r;
    }

    GofResult fit_and_test(DistFamily family, std::span<const double> data, std::optional<double> fix_loc)
    {
        return evaluate_fit(data, fit_mle(family, data, fix_loc));
    }

    void to_json(nlohmann::json &j, const DistSpec &spec)
    {
        j = nlohmann::json{{"family", std::string(family_name(spec.family))},
                           {"shape", spec.shape},
                           {"loc", spec.loc},
                           {"scale", spec.scale}};
    }

    void from_json(const nlohmann::json &j, DistSpec &spec)
    {
        spec.family = parse_family(j.at("family").get<std::string>());
        spec.shape = j.value("shape", std::vector<double>{});
        spec.loc = j.value("loc", 0.0);
        spec.scale = j.at("scale").get<double>();
    }
}
