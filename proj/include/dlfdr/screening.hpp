#ifndef DLFDR_SCREENING_HPP
#define DLFDR_SCREENING_HPP

#include <algorithm>
#include <cmath>
#include <string_view>

#include "em_fit.hpp"
#include "error.hpp"
#include "lfdr.hpp"

namespace dlfdr {

enum class ScreeningBranch { gp_type, poisson_type };

inline std::string_view to_string(ScreeningBranch b) noexcept
{
    return b == ScreeningBranch::gp_type ? "gp" : "poisson";
}

/// D_N and the pieces it was assembled from.
///   GP-type:      min(ceil(max(lambda/(e^{theta-1} - theta), log N/(theta - 1 - log theta), C+1)), K)
///   Poisson-type: min(ceil(max(lambda, log N, C+1)), K)
struct ScreeningThreshold {
    count_t d_n = 0;
    ScreeningBranch branch = ScreeningBranch::poisson_type;
    double lambda_term = 0.0;
    double log_n_term = 0.0;
    count_t c_plus_1 = 0;
    count_t max_count = 0;
    double pre_clamp = 0.0;  ///< max(...) before the ceiling and the K clamp
    double ceiled = 0.0;     ///< ceil(pre_clamp), may exceed K

    bool clamped_at_k() const noexcept { return ceiled > static_cast<double>(max_count); }
    bool clamped_at_c() const noexcept
    {
        return pre_clamp == static_cast<double>(c_plus_1) &&
               lambda_term < pre_clamp && log_n_term < pre_clamp;
    }

    friend bool operator==(const ScreeningThreshold&, const ScreeningThreshold&) = default;
};

inline ScreeningThreshold d_n(const NullParams& params, count_t N, count_t cutoff, count_t max_count)
{
    if (N < 2) {
        throw domain_error("screening needs N >= 2");
    }
    if (cutoff < 0 || cutoff >= max_count) {
        throw domain_error("screening needs 0 <= C < K");
    }
    if (!(params.theta < 1.0)) {
        throw domain_error("theta must be below 1");
    }
    ScreeningThreshold t;
    t.c_plus_1 = cutoff + 1;
    t.max_count = max_count;
    const double log_n = std::log(static_cast<double>(N));
    // theta == 0 inside a dispersion family is the Poisson kernel.
    if (has_dispersion(params.family) && params.theta > 0.0) {
        t.branch = ScreeningBranch::gp_type;
        const double th = params.theta;
        t.lambda_term = params.lambda / (std::exp(th - 1.0) - th);
        t.log_n_term = log_n / (th - 1.0 - std::log(th));
    } else {
        t.branch = ScreeningBranch::poisson_type;
        t.lambda_term = params.lambda;
        t.log_n_term = log_n;
    }
    t.pre_clamp = std::max({t.lambda_term, t.log_n_term, static_cast<double>(t.c_plus_1)});
    t.ceiled = std::ceil(t.pre_clamp);
    t.d_n = t.clamped_at_k() ? max_count : static_cast<count_t>(t.ceiled);
    return t;
}

inline ScreeningThreshold d_n(const NullFit& fit, count_t N, count_t cutoff, count_t max_count)
{
    return d_n(fit.params, N, cutoff, max_count);
}

/// Every observed j >= D_N is rejected outright; below D_N the local fdr decides.
inline RejectionSet two_stage_decide(const NullFit& fit, const CountHistogram& h, double alpha,
                                     const ScreeningThreshold& threshold)
{
    check_alpha(alpha);
    RejectionSet out;
    for (auto [j, nj] : h.counts()) {
        if (j >= threshold.d_n || local_fdr(fit, h, j) < alpha) {
            out.insert(j);
        }
    }
    return out;
}

} // namespace dlfdr

#endif // DLFDR_SCREENING_HPP
