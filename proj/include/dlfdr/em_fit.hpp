#ifndef DLFDR_EM_FIT_HPP
#define DLFDR_EM_FIT_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "error.hpp"
#include "histogram.hpp"
#include "null_models.hpp"

namespace dlfdr {

struct EmConfig {
    double tol = 1e-8;      ///< stop when |delta log L0| < tol
    int max_iter = 500;
    /// Upper limit on the imputation horizon J_max (never below K).
    count_t horizon_cap = 4096;
};

/// Converged (or abandoned) EM output for one cut-off.
struct NullFit {
    NullParams params;
    count_t cutoff = 0;
    double pi0_hat = 1.0;
    std::vector<double> loglik_trace;
    bool converged = false;
    int iterations = 0;

    Family family() const noexcept { return params.family; }
    double loglik() const noexcept { return loglik_trace.empty() ? -INFINITY : loglik_trace.back(); }

    friend bool operator==(const NullFit&, const NullFit&) = default;
};

namespace detail {

/// log f0(j) with the j-independent pieces hoisted out.
class LogPmfRow {
public:
    explicit LogPmfRow(const NullParams& p)
        : lambda_(p.lambda), theta_(p.theta),
          head_(std::log1p(-p.eta) + std::log(p.lambda) - p.lambda),
          zero_(std::log(p.eta + (1.0 - p.eta) * std::exp(-p.lambda)))
    {
    }

    double operator()(count_t j) const
    {
        if (j == 0) {
            return zero_;
        }
        const double jd = static_cast<double>(j);
        return head_ + (jd - 1.0) * std::log(lambda_ + theta_ * jd) - theta_ * jd - log_factorial(j);
    }

private:
    double lambda_, theta_, head_, zero_;
};

} // namespace detail

/// log f0(j) for j = 0..last.
inline std::vector<double> null_log_pmf_table(const NullParams& p, count_t last)
{
    if (!p.valid()) {
        throw domain_error("invalid GP parameters");
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(last + 1));
    detail::LogPmfRow row(p);
    for (count_t j = 0; j <= last; ++j) {
        out.push_back(row(j));
    }
    return out;
}

namespace detail {

inline double log_sum_exp(const double* first, const double* last)
{
    const double m = *std::max_element(first, last);
    if (!std::isfinite(m)) {
        return m;
    }
    double s = 0.0;
    for (const double* it = first; it != last; ++it) {
        s += std::exp(*it - m);
    }
    return m + std::log(s);
}

inline void check_cutoff(const CountHistogram& h, count_t cutoff)
{
    if (cutoff < 0) {
        throw domain_error("negative cut-off");
    }
    if (cutoff > h.max_count()) {
        throw domain_error("cut-off beyond support");
    }
}

inline void check_identifiable(Family family, const CountHistogram& h, count_t cutoff)
{
    if (h.positions_up_to(cutoff) < 1) {
        throw degenerate_error("unidentifiable: no observations at or below the cut-off");
    }
    if (free_parameters(family) >= 2 && h.distinct_up_to(cutoff) < 2) {
        throw degenerate_error("unidentifiable");
    }
}

} // namespace detail

/// Cell probabilities of the truncated null sample: f0(j) / sum_{t<=C} f0(t), j = 0..C.
inline std::vector<double> multinomial_probs(const NullParams& p, count_t cutoff)
{
    if (cutoff < 0) {
        throw domain_error("negative cut-off");
    }
    auto logf = null_log_pmf_table(p, cutoff);
    const double log_mass = detail::log_sum_exp(logf.data(), logf.data() + logf.size());
    if (!(log_mass > std::log(1e-300))) {
        throw degenerate_error("null mass vanishes below C");
    }
    for (double& v : logf) {
        v = std::exp(v - log_mass);
    }
    return logf;
}

struct Responsibilities {
    double tau0;  ///< P(structural zero | j)
    double tau1;  ///< P(GP component | j)
    double tau2;  ///< lambda / (lambda + theta j)
    double tau3;  ///< theta j / (lambda + theta j)
};

inline Responsibilities responsibilities(const NullParams& p, count_t j)
{
    Responsibilities r{};
    r.tau0 = (j == 0 && p.eta > 0.0) ? p.eta / null_pmf(p, 0) : 0.0;
    r.tau1 = 1.0 - r.tau0;
    const double denom = p.lambda + p.theta * static_cast<double>(j);
    r.tau2 = p.lambda / denom;
    r.tau3 = 1.0 - r.tau2;
    return r;
}

/// J_max: max(K, smallest J with F0(J) > 1 - 1e-10), limited by cfg.horizon_cap.
inline count_t imputation_horizon(const NullParams& p, count_t max_count, count_t cap)
{
    const count_t limit = std::max(max_count, cap);
    double mass = 0.0;
    count_t j = 0;
    for (; j <= limit; ++j) {
        mass += null_pmf(p, j);
        if (mass > 1.0 - 1e-10) {
            break;
        }
    }
    return std::max(max_count, std::min(j, limit));
}

/// Observed-data log-likelihood of the truncated multinomial sample {n_j : j <= C},
/// including the multinomial coefficient. With C = K nothing is truncated and the
/// cell probabilities are f0(j) themselves.
inline double truncated_loglik(const NullParams& p, const CountHistogram& h, count_t cutoff)
{
    detail::check_cutoff(h, cutoff);
    const auto logf = null_log_pmf_table(p, cutoff);
    const double log_mass = cutoff == h.max_count()
                                ? 0.0
                                : detail::log_sum_exp(logf.data(), logf.data() + logf.size());
    double ll = 0.0;
    double n = 0.0;
    for (auto [j, nj] : h.counts()) {
        if (j > cutoff) {
            break;
        }
        const double w = static_cast<double>(nj);
        ll += w * (logf[static_cast<std::size_t>(j)] - log_mass) - std::lgamma(w + 1.0);
        n += w;
    }
    return ll + std::lgamma(n + 1.0);
}

/// One EM update. Counts above C are replaced by their conditional expectation
/// n f0(j) / F0(C) for C < j <= J_max; the GP kernel is handled by splitting
/// log(lambda + theta j) with the weights tau2, tau3.
inline NullParams em_step(const NullParams& p, const CountHistogram& h, count_t cutoff,
                          const EmConfig& cfg = {})
{
    detail::check_cutoff(h, cutoff);
    detail::check_identifiable(p.family, h, cutoff);

    const count_t K = h.max_count();
    const bool truncated = cutoff < K;

    // log f0 up to the imputation horizon, built in one pass (see imputation_horizon).
    std::vector<double> logf;
    {
        const detail::LogPmfRow row(p);
        const count_t limit = std::max(K, cfg.horizon_cap);
        double mass = 0.0;
        for (count_t j = 0;; ++j) {
            logf.push_back(row(j));
            if (!truncated) {
                if (j == K) {
                    break;
                }
                continue;
            }
            mass += std::exp(logf.back());
            if ((mass > 1.0 - 1e-10 && j >= K) || j == limit) {
                break;
            }
        }
    }
    const count_t horizon = static_cast<count_t>(logf.size()) - 1;

    // Complete-data weights w_j.
    std::vector<double> w(static_cast<std::size_t>(horizon + 1), 0.0);
    double n = 0.0;
    for (auto [j, nj] : h.counts()) {
        if (j > cutoff) {
            break;
        }
        w[static_cast<std::size_t>(j)] = static_cast<double>(nj);
        n += static_cast<double>(nj);
    }
    if (truncated) {
        const double log_mass =
            detail::log_sum_exp(logf.data(), logf.data() + static_cast<std::ptrdiff_t>(cutoff) + 1);
        for (count_t j = cutoff + 1; j <= horizon; ++j) {
            w[static_cast<std::size_t>(j)] = n * std::exp(logf[static_cast<std::size_t>(j)] - log_mass);
        }
    }

    const double f0_zero = std::exp(logf[0]);
    const double zero_inflated = p.eta > 0.0 ? w[0] * p.eta / f0_zero : 0.0;

    double total = 0.0;       // sum w_j
    double gp_mass = 0.0;     // sum w_j tau1j
    double gp_first = 0.0;    // sum j w_j tau1j
    double lambda_num = 0.0;  // sum w_j tau1j (1 + (j - 1) tau2j)
    double theta_num = 0.0;   // sum w_j tau1j (j - 1) tau3j
    for (count_t j = 0; j <= horizon; ++j) {
        const double wj = w[static_cast<std::size_t>(j)];
        if (wj == 0.0) {
            continue;
        }
        const double jd = static_cast<double>(j);
        const double tau1 = j == 0 ? 1.0 - (p.eta > 0.0 ? p.eta / f0_zero : 0.0) : 1.0;
        const double tau2 = p.lambda / (p.lambda + p.theta * jd);
        const double tau3 = 1.0 - tau2;
        total += wj;
        gp_mass += wj * tau1;
        gp_first += jd * wj * tau1;
        lambda_num += wj * tau1 * (1.0 + (jd - 1.0) * tau2);
        theta_num += wj * tau1 * (jd - 1.0) * tau3;
    }

    NullParams next = p;
    switch (p.family) {
    case Family::zigp:
        next.eta = zero_inflated / (zero_inflated + gp_mass);
        next.lambda = lambda_num / gp_mass;
        next.theta = gp_first > 0.0 ? theta_num / gp_first : 0.0;
        break;
    case Family::zip:
        next.eta = zero_inflated / (zero_inflated + gp_mass);
        next.lambda = gp_first / gp_mass;
        break;
    case Family::gp:
        next.lambda = lambda_num / total;
        next.theta = gp_first > 0.0 ? theta_num / gp_first : 0.0;
        break;
    case Family::poisson:
        next.lambda = gp_first / total;
        break;
    }
    next.eta = std::clamp(next.eta, 0.0, kParamUpper);
    next.theta = std::clamp(next.theta, 0.0, kParamUpper);
    next.lambda = std::max(next.lambda, kLambdaFloor);
    return next;
}

/// Moment-based starting point computed from the truncated sample.
inline NullParams initial_params(Family family, const CountHistogram& h, count_t cutoff)
{
    double n = 0.0, s1 = 0.0, s2 = 0.0;
    for (auto [j, nj] : h.counts()) {
        if (j > cutoff) {
            break;
        }
        const double w = static_cast<double>(nj);
        const double jd = static_cast<double>(j);
        n += w;
        s1 += w * jd;
        s2 += w * jd * jd;
    }
    const double mean = n > 0.0 ? s1 / n : 0.0;
    const double var = n > 1.0 ? (s2 - n * mean * mean) / (n - 1.0) : 0.0;
    const double n0 = static_cast<double>(h.at(0));

    double eta = 0.01;
    if (mean > 0.0) {
        const double e = std::exp(-mean);
        eta = std::max(0.01, (n0 / n - e) / (1.0 - e));
    }
    eta = std::min(eta, 0.99);
    const double lambda = std::max(mean, 1e-3);
    const double theta = var > 0.0 ? std::clamp(1.0 - std::sqrt(mean / var), 0.01, 0.9) : 0.01;
    return NullParams::restricted(family, eta, lambda, theta);
}

/// pi0 estimate: min(1, sum_{j<=C} f_hat(j) / sum_{j<=C} f0_hat(j)), f_hat(j) = n_j / N.
inline double estimate_pi0(const NullParams& p, const CountHistogram& h, count_t cutoff)
{
    detail::check_cutoff(h, cutoff);
    const auto logf = null_log_pmf_table(p, cutoff);
    double null_mass = 0.0;
    for (double v : logf) {
        null_mass += std::exp(v);
    }
    if (!(null_mass > 0.0)) {
        throw degenerate_error("null mass vanishes below C");
    }
    const double empirical =
        static_cast<double>(h.positions_up_to(cutoff)) / static_cast<double>(h.total());
    return std::min(1.0, empirical / null_mass);
}

inline NullFit fit_null(Family family, const CountHistogram& h, count_t cutoff, const EmConfig& cfg = {})
{
    detail::check_cutoff(h, cutoff);
    if (cutoff < 1) {
        throw domain_error("cut-off must be at least 1");
    }
    detail::check_identifiable(family, h, cutoff);

    NullFit fit;
    fit.cutoff = cutoff;
    fit.params = initial_params(family, h, cutoff);
    double ll = truncated_loglik(fit.params, h, cutoff);
    fit.loglik_trace.push_back(ll);
    for (int it = 1; it <= cfg.max_iter; ++it) {
        const NullParams next = em_step(fit.params, h, cutoff, cfg);
        const double next_ll = truncated_loglik(next, h, cutoff);
        fit.params = next;
        fit.loglik_trace.push_back(next_ll);
        fit.iterations = it;
        if (std::abs(next_ll - ll) < cfg.tol) {
            fit.converged = true;
            break;
        }
        ll = next_ll;
    }
    fit.pi0_hat = estimate_pi0(fit.params, h, cutoff);
    return fit;
}

} // namespace dlfdr

#endif // DLFDR_EM_FIT_HPP
