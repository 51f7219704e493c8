#ifndef DLFDR_NULL_MODELS_HPP
#define DLFDR_NULL_MODELS_HPP

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "histogram.hpp"

namespace dlfdr {

/// The zero-inflated Generalized Poisson family and its three sub-models.
enum class Family { zigp, zip, gp, poisson };

inline constexpr std::array kAllFamilies{Family::zigp, Family::zip, Family::gp, Family::poisson};

inline constexpr double kParamUpper = 1.0 - 1e-8;  ///< ceiling for eta and theta
inline constexpr double kLambdaFloor = 1e-8;

inline std::string_view to_string(Family f) noexcept
{
    switch (f) {
    case Family::zigp: return "zigp";
    case Family::zip: return "zip";
    case Family::gp: return "gp";
    case Family::poisson: return "poisson";
    }
    return "?";
}

inline Family parse_family(std::string_view s)
{
    for (Family f : kAllFamilies) {
        if (s == to_string(f)) {
            return f;
        }
    }
    if (s == "p") {
        return Family::poisson;
    }
    throw input_error("unknown family '" + std::string(s) + "'");
}

constexpr int free_parameters(Family f) noexcept
{
    switch (f) {
    case Family::zigp: return 3;
    case Family::zip:
    case Family::gp: return 2;
    case Family::poisson: return 1;
    }
    return 0;
}

constexpr bool has_zero_inflation(Family f) noexcept { return f == Family::zigp || f == Family::zip; }
constexpr bool has_dispersion(Family f) noexcept { return f == Family::zigp || f == Family::gp; }

/// Null parameter set (eta, lambda, theta) tagged with the family it belongs to.
/// Parameters a family does not have are held at exactly zero.
struct NullParams {
    Family family = Family::zigp;
    double eta = 0.0;
    double lambda = 1.0;
    double theta = 0.0;

    static NullParams zigp(double eta, double lambda, double theta)
    {
        return checked({Family::zigp, eta, lambda, theta});
    }
    static NullParams zip(double eta, double lambda) { return checked({Family::zip, eta, lambda, 0.0}); }
    static NullParams gp(double lambda, double theta) { return checked({Family::gp, 0.0, lambda, theta}); }
    static NullParams poisson(double lambda) { return checked({Family::poisson, 0.0, lambda, 0.0}); }

    /// Builds a parameter set for `f`, dropping the components `f` does not carry.
    static NullParams restricted(Family f, double eta, double lambda, double theta)
    {
        return checked({f, has_zero_inflation(f) ? eta : 0.0, lambda, has_dispersion(f) ? theta : 0.0});
    }

    bool valid() const noexcept
    {
        const bool box = std::isfinite(eta) && std::isfinite(lambda) && std::isfinite(theta) &&
                         eta >= 0.0 && eta <= kParamUpper && lambda > 0.0 && theta >= 0.0 &&
                         theta <= kParamUpper;
        const bool shape = (has_zero_inflation(family) || eta == 0.0) &&
                           (has_dispersion(family) || theta == 0.0);
        return box && shape;
    }

    friend bool operator==(const NullParams&, const NullParams&) = default;

private:
    static NullParams checked(NullParams p)
    {
        if (!p.valid()) {
            throw domain_error("invalid GP parameters");
        }
        return p;
    }
};

namespace detail {

inline void check_gp(double lambda, double theta)
{
    if (!(lambda > 0.0) || !std::isfinite(lambda) || !(theta >= 0.0) || !(theta <= kParamUpper)) {
        throw domain_error("invalid GP parameters");
    }
}

/// log j!, tabulated for small j.
inline double log_factorial(count_t j)
{
    constexpr count_t kTable = 1 << 16;
    static const std::vector<double> table = [] {
        std::vector<double> t(static_cast<std::size_t>(kTable));
        for (count_t i = 0; i < kTable; ++i) {
            t[static_cast<std::size_t>(i)] = std::lgamma(static_cast<double>(i) + 1.0);
        }
        return t;
    }();
    return j < kTable ? table[static_cast<std::size_t>(j)] : std::lgamma(static_cast<double>(j) + 1.0);
}

} // namespace detail

/// log g(j) for GP(lambda, theta), evaluated without forming (lambda + theta j)^(j-1).
inline double gp_log_pmf(count_t j, double lambda, double theta)
{
    detail::check_gp(lambda, theta);
    if (j < 0) {
        return -INFINITY;
    }
    if (j == 0) {
        return -lambda;
    }
    const double jd = static_cast<double>(j);
    return std::log(lambda) + (jd - 1.0) * std::log(lambda + theta * jd) - lambda - theta * jd -
           detail::log_factorial(j);
}

inline double gp_pmf(count_t j, double lambda, double theta)
{
    return std::exp(gp_log_pmf(j, lambda, theta));
}

/// log f0(j) under the zero-inflated model.
inline double null_log_pmf(const NullParams& p, count_t j)
{
    if (!p.valid()) {
        throw domain_error("invalid GP parameters");
    }
    if (j < 0) {
        return -INFINITY;
    }
    if (j == 0) {
        return std::log(p.eta + (1.0 - p.eta) * std::exp(-p.lambda));
    }
    return std::log1p(-p.eta) + gp_log_pmf(j, p.lambda, p.theta);
}

inline double null_pmf(const NullParams& p, count_t j) { return std::exp(null_log_pmf(p, j)); }

/// Klar-type upper bound on P(T >= D) for T ~ GP(lambda, theta), 0 < theta < 1.
inline double gp_tail_bound(count_t D, double lambda, double theta)
{
    if (!(theta > 0.0 && theta < 1.0) || !(lambda > 0.0) || D < 1) {
        throw domain_error("bound not applicable");
    }
    const double d = static_cast<double>(D);
    const double min_d = lambda / (std::exp(theta - 1.0) - theta);
    const double delta = 1.0 - std::exp(1.0 - theta) * (theta + lambda / (d + 1.0));
    if (d < min_d || !(delta > 0.0)) {
        throw domain_error("bound not applicable");
    }
    const double log_bound = -std::log(delta) + std::log(lambda) +
                             (d - 1.0) * std::log(lambda + theta * d) - (d + 0.5) * std::log(d) -
                             lambda - (theta - 1.0) * d;
    return std::exp(log_bound);
}

/// Chernoff bound e^{-lambda} (e lambda)^D / D^D on P(T >= D), T ~ Poisson(lambda),
/// valid for 0 < lambda < D.
inline double poisson_tail_bound(count_t D, double lambda)
{
    const double d = static_cast<double>(D);
    if (!(lambda > 0.0) || !(lambda < d)) {
        throw domain_error("bound not applicable");
    }
    return std::exp(-lambda + d * (1.0 + std::log(lambda)) - d * std::log(d));
}

} // namespace dlfdr

#endif // DLFDR_NULL_MODELS_HPP
