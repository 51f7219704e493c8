#ifndef DLFDR_LFDR_HPP
#define DLFDR_LFDR_HPP

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <vector>

#include "em_fit.hpp"
#include "error.hpp"
#include "histogram.hpp"

namespace dlfdr {

/// Rejected hypotheses, identified by count value j. All positions tied at j
/// share the decision.
using RejectionSet = std::set<count_t>;

inline void check_alpha(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw domain_error("alpha must lie in (0, 1)");
    }
}

/// pi0_hat f0_hat(j) / f_hat(j) with f_hat(j) = n_j / N. Not clamped.
inline double local_fdr(const NullFit& fit, const CountHistogram& h, count_t j)
{
    const count_t nj = h.at(j);
    if (nj == 0) {
        throw domain_error("fdr undefined off support");
    }
    const double f_hat = static_cast<double>(nj) / static_cast<double>(h.total());
    return fit.pi0_hat * null_pmf(fit.params, j) / f_hat;
}

inline RejectionSet one_stage_decide(const NullFit& fit, const CountHistogram& h, double alpha)
{
    check_alpha(alpha);
    RejectionSet out;
    for (auto [j, nj] : h.counts()) {
        if (local_fdr(fit, h, j) < alpha) {
            out.insert(j);
        }
    }
    return out;
}

/// Upper tail of the fitted null, inclusive at j: sum_{t >= j} f0(t).
inline double null_p_value(const NullParams& params, count_t j)
{
    if (j <= 0) {
        return 1.0;
    }
    const auto logf = null_log_pmf_table(params, j - 1);
    double lower = 0.0;
    for (double v : logf) {
        lower += std::exp(v);
    }
    if (1.0 - lower > 1e-3) {
        return 1.0 - lower;
    }
    // Deep tail: sum forward so small p-values keep their relative precision.
    constexpr count_t kMaxTerms = 200000;
    double sum = 0.0;
    for (count_t t = j; t < j + kMaxTerms; ++t) {
        const double term = null_pmf(params, t);
        sum += term;
        if (term <= sum * 1e-17 || term == 0.0) {
            break;
        }
    }
    return std::min(sum, 1.0);
}

inline double null_p_value(const NullFit& fit, count_t j) { return null_p_value(fit.params, j); }

/// Weighted step-up rule. `p` must be sorted ascending; `weights[i]` is the number
/// of positions sharing p[i]. Returns how many leading entries are rejected: the
/// largest i with p[i] <= alpha * R_i / (N pi0), R_i the number of positions with
/// p-value <= p[i], widened to cover every entry tied with p[i].
inline std::size_t step_up_count(std::span<const double> p, std::span<const count_t> weights,
                                 count_t total_positions, double alpha, double pi0)
{
    if (p.size() != weights.size()) {
        throw domain_error("p-values and weights differ in length");
    }
    const double scale = alpha / (static_cast<double>(total_positions) * pi0);
    std::size_t rejected = 0;
    count_t cumulative = 0;
    std::size_t i = 0;
    while (i < p.size()) {
        std::size_t k = i;
        while (k < p.size() && p[k] == p[i]) {
            cumulative += weights[k];
            ++k;
        }
        if (p[i] <= scale * static_cast<double>(cumulative)) {
            rejected = k;
        }
        i = k;
    }
    return rejected;
}

namespace detail {

inline RejectionSet step_up_decide(const NullFit& fit, const CountHistogram& h, double alpha,
                                   double pi0)
{
    check_alpha(alpha);
    struct Item {
        double p;
        count_t j;
        count_t n;
    };
    std::vector<Item> items;
    items.reserve(h.support_size());
    for (auto [j, nj] : h.counts()) {
        items.push_back({null_p_value(fit.params, j), j, nj});
    }
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.p < b.p; });
    std::vector<double> p;
    std::vector<count_t> w;
    for (const auto& it : items) {
        p.push_back(it.p);
        w.push_back(it.n);
    }
    const std::size_t l = step_up_count(p, w, h.total(), alpha, pi0);
    RejectionSet out;
    for (std::size_t i = 0; i < l; ++i) {
        out.insert(items[i].j);
    }
    return out;
}

} // namespace detail

/// Storey's step-up with the fit's pi0 estimate.
inline RejectionSet storey_decide(const NullFit& fit, const CountHistogram& h, double alpha)
{
    return detail::step_up_decide(fit, h, alpha, fit.pi0_hat);
}

/// Benjamini-Hochberg: the step-up rule with pi0 fixed at 1.
inline RejectionSet bh_decide(const NullFit& fit, const CountHistogram& h, double alpha)
{
    return detail::step_up_decide(fit, h, alpha, 1.0);
}

} // namespace dlfdr

#endif // DLFDR_LFDR_HPP
