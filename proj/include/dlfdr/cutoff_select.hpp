#ifndef DLFDR_CUTOFF_SELECT_HPP
#define DLFDR_CUTOFF_SELECT_HPP

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "em_fit.hpp"
#include "error.hpp"
#include "histogram.hpp"

namespace dlfdr {

enum class CutoffMethod { c1, c2 };

inline std::string_view to_string(CutoffMethod m) noexcept { return m == CutoffMethod::c1 ? "c1" : "c2"; }

struct CutoffConfig {
    EmConfig em;
    /// Pick the minimiser of the C2 log-likelihood instead of the maximiser.
    bool c2_literal_argmin = false;
};

struct ScanEntry {
    count_t nu = 0;
    std::optional<NullFit> fit;  ///< empty when nu was skipped
    double score = -INFINITY;    ///< criterion value; -inf disqualifies nu
    double loglik = -INFINITY;   ///< C1: l_nu = S_nu + N_nu log pi0; C2: same as score

    friend bool operator==(const ScanEntry&, const ScanEntry&) = default;
};

struct CutoffScan {
    Family family = Family::zigp;
    CutoffMethod method = CutoffMethod::c1;
    std::vector<ScanEntry> per_nu;
    count_t chosen = 0;

    const ScanEntry& entry(count_t nu) const { return per_nu.at(static_cast<std::size_t>(nu - 1)); }
    const NullFit& chosen_fit() const { return *entry(chosen).fit; }

    friend bool operator==(const CutoffScan&, const CutoffScan&) = default;
};

/// CUSUM criterion S_nu = sum_{j<=nu} n_j log(f0(j)/f_hat(j)) + sum_{j<=K} n_j log f_hat(j),
/// f_hat(j) = n_j / N. pi0 enters the profile form as lr_j - log pi0 and cancels.
inline double c1_score(const NullParams& params, const CountHistogram& h, count_t nu)
{
    const double N = static_cast<double>(h.total());
    double cusum = 0.0;
    double base = 0.0;
    for (auto [j, nj] : h.counts()) {
        const double w = static_cast<double>(nj);
        const double log_fhat = std::log(w / N);
        base += w * log_fhat;
        if (j <= nu) {
            const double log_f0 = null_log_pmf(params, j);
            if (!std::isfinite(log_f0)) {
                return -INFINITY;
            }
            cusum += w * (log_f0 - log_fhat);
        }
    }
    return cusum + base;
}

inline double c1_score(const NullFit& fit, const CountHistogram& h, count_t nu)
{
    return c1_score(fit.params, h, nu);
}

/// Efron-type truncated likelihood n log xi + (N - n) log(1 - xi) + sum_{j<=nu} n_j log f0(j),
/// xi = pi0 sum_{j<=nu} f0(j). Returns -inf when xi is 0 or 1.
inline double c2_score(const NullFit& fit, const CountHistogram& h, count_t nu)
{
    const auto logf = null_log_pmf_table(fit.params, nu);
    double mass = 0.0;
    for (double v : logf) {
        mass += std::exp(v);
    }
    const double xi = fit.pi0_hat * mass;
    if (!(xi > 0.0) || !(xi < 1.0)) {
        return -INFINITY;
    }
    double n = 0.0;
    double kernel = 0.0;
    for (auto [j, nj] : h.counts()) {
        if (j > nu) {
            break;
        }
        n += static_cast<double>(nj);
        kernel += static_cast<double>(nj) * logf[static_cast<std::size_t>(j)];
    }
    const double rest = static_cast<double>(h.total()) - n;
    return n * std::log(xi) + rest * std::log1p(-xi) + kernel;
}

namespace detail {

inline CutoffScan scan_cutoffs(Family family, const CountHistogram& h, CutoffMethod method,
                               const CutoffConfig& cfg)
{
    const count_t K = h.max_count();
    if (K < 1) {
        throw degenerate_error("unidentifiable: every position has count 0");
    }
    CutoffScan scan;
    scan.family = family;
    scan.method = method;
    scan.per_nu.reserve(static_cast<std::size_t>(K));
    const std::size_t needed = static_cast<std::size_t>(free_parameters(family));
    for (count_t nu = 1; nu <= K; ++nu) {
        ScanEntry e;
        e.nu = nu;
        if (h.positions_up_to(nu) > 0 && h.distinct_up_to(nu) >= needed) {
            try {
                e.fit = fit_null(family, h, nu, cfg.em);
            } catch (const Error& err) {
                if (err.kind() != ErrorKind::degenerate) {
                    throw;
                }
            }
        }
        if (e.fit) {
            if (method == CutoffMethod::c1) {
                e.score = c1_score(*e.fit, h, nu);
                const double n_nu = static_cast<double>(h.positions_up_to(nu));
                e.loglik = e.score + n_nu * std::log(e.fit->pi0_hat);
            } else {
                e.score = c2_score(*e.fit, h, nu);
                e.loglik = e.score;
            }
            if (std::isnan(e.score)) {
                e.score = -INFINITY;
            }
        }
        scan.per_nu.push_back(std::move(e));
    }

    const bool minimise = method == CutoffMethod::c2 && cfg.c2_literal_argmin;
    std::optional<count_t> best;
    double best_score = 0.0;
    for (const auto& e : scan.per_nu) {
        if (!std::isfinite(e.score)) {
            continue;
        }
        const bool better = !best || (minimise ? e.score < best_score : e.score > best_score);
        if (better) {
            best = e.nu;
            best_score = e.score;
        }
    }
    if (!best) {
        throw degenerate_error("no admissible cut-off");
    }
    scan.chosen = *best;
    return scan;
}

} // namespace detail

/// C1: argmax over nu = 1..K of the CUSUM criterion, smallest nu on ties.
inline CutoffScan select_c1(Family family, const CountHistogram& h, const CutoffConfig& cfg = {})
{
    return detail::scan_cutoffs(family, h, CutoffMethod::c1, cfg);
}

/// C2: argmax over nu of the Efron-type truncated log-likelihood (argmin with
/// cfg.c2_literal_argmin).
inline CutoffScan select_c2(Family family, const CountHistogram& h, const CutoffConfig& cfg = {})
{
    return detail::scan_cutoffs(family, h, CutoffMethod::c2, cfg);
}

inline CutoffScan select_cutoff(CutoffMethod method, Family family, const CountHistogram& h,
                                const CutoffConfig& cfg = {})
{
    return method == CutoffMethod::c1 ? select_c1(family, h, cfg) : select_c2(family, h, cfg);
}

/// What the user asked for: a data-driven method, or a fixed C that skips the scan.
struct CutoffChoice {
    std::optional<CutoffMethod> method = CutoffMethod::c1;
    count_t fixed = 0;

    friend bool operator==(const CutoffChoice&, const CutoffChoice&) = default;
};

inline std::string to_string(const CutoffChoice& c)
{
    return c.method ? std::string(to_string(*c.method)) : "fixed:" + std::to_string(c.fixed);
}

/// Accepts "c1", "c2" or "fixed:<k>" with k >= 1.
inline CutoffChoice parse_cutoff_choice(std::string_view s)
{
    if (s == "c1") {
        return {CutoffMethod::c1, 0};
    }
    if (s == "c2") {
        return {CutoffMethod::c2, 0};
    }
    constexpr std::string_view prefix = "fixed:";
    if (s.starts_with(prefix)) {
        const auto digits = s.substr(prefix.size());
        count_t k = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
        if (ec == std::errc{} && ptr == digits.data() + digits.size() && !digits.empty()) {
            if (k < 1) {
                throw input_error("fixed cut-off must be at least 1");
            }
            return {std::nullopt, k};
        }
    }
    throw input_error("bad cut-off '" + std::string(s) + "', expected c1, c2 or fixed:<k>");
}

struct ChosenFit {
    std::optional<CutoffScan> scan;  ///< empty for a fixed cut-off
    NullFit fit;
};

inline ChosenFit fit_with_choice(const CutoffChoice& choice, Family family, const CountHistogram& h,
                                 const CutoffConfig& cfg = {})
{
    if (!choice.method) {
        return {std::nullopt, fit_null(family, h, choice.fixed, cfg.em)};
    }
    auto scan = select_cutoff(*choice.method, family, h, cfg);
    NullFit fit = scan.chosen_fit();
    return {std::move(scan), std::move(fit)};
}

} // namespace dlfdr

#endif // DLFDR_CUTOFF_SELECT_HPP
