#ifndef DLFDR_REPORT_HPP
#define DLFDR_REPORT_HPP

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lfdr.hpp"
#include "screening.hpp"

namespace dlfdr {

enum class Procedure { one_stage, two_stage, storey, bh };

inline constexpr std::array kAllProcedures{Procedure::one_stage, Procedure::two_stage,
                                           Procedure::storey, Procedure::bh};

inline std::string_view to_string(Procedure p) noexcept
{
    switch (p) {
    case Procedure::one_stage: return "one-stage";
    case Procedure::two_stage: return "two-stage";
    case Procedure::storey: return "storey";
    case Procedure::bh: return "bh";
    }
    return "?";
}

inline Procedure parse_procedure(std::string_view s)
{
    for (Procedure p : kAllProcedures) {
        if (s == to_string(p)) {
            return p;
        }
    }
    throw input_error("unknown procedure '" + std::string(s) + "'");
}

struct CountRow {
    count_t count = 0;
    count_t n_positions = 0;
    double f_hat = 0.0;
    double f0_hat = 0.0;
    double lfdr = 0.0;  ///< clamped to [0, 1]
    double p_value = 1.0;

    friend bool operator==(const CountRow&, const CountRow&) = default;
};

struct DecisionReport {
    Family family = Family::zigp;
    count_t cutoff = 0;
    double pi0_hat = 1.0;
    double alpha = 0.05;
    std::vector<CountRow> per_count;
    std::map<Procedure, RejectionSet> rejected;
    /// Absent when the cut-off sits at K: nothing is left to screen and the
    /// two-stage rule coincides with the one-stage rule.
    std::optional<ScreeningThreshold> screening;

    count_t positions_rejected(Procedure p) const
    {
        count_t total = 0;
        auto it = rejected.find(p);
        if (it == rejected.end()) {
            return 0;
        }
        for (const auto& row : per_count) {
            if (it->second.contains(row.count)) {
                total += row.n_positions;
            }
        }
        return total;
    }

    friend bool operator==(const DecisionReport&, const DecisionReport&) = default;
};

/// Runs every procedure on one fit.
inline DecisionReport decide(const NullFit& fit, const CountHistogram& h, double alpha)
{
    check_alpha(alpha);
    DecisionReport r;
    r.family = fit.family();
    r.cutoff = fit.cutoff;
    r.pi0_hat = fit.pi0_hat;
    r.alpha = alpha;
    const double N = static_cast<double>(h.total());
    for (auto [j, nj] : h.counts()) {
        CountRow row;
        row.count = j;
        row.n_positions = nj;
        row.f_hat = static_cast<double>(nj) / N;
        row.f0_hat = null_pmf(fit.params, j);
        row.lfdr = std::clamp(local_fdr(fit, h, j), 0.0, 1.0);
        row.p_value = null_p_value(fit.params, j);
        r.per_count.push_back(row);
    }

    const auto one = one_stage_decide(fit, h, alpha);
    r.rejected[Procedure::one_stage] = one;
    if (fit.cutoff < h.max_count() && h.total() >= 2) {
        r.screening = d_n(fit, h.total(), fit.cutoff, h.max_count());
        r.rejected[Procedure::two_stage] = two_stage_decide(fit, h, alpha, *r.screening);
    } else {
        r.rejected[Procedure::two_stage] = one;
    }
    r.rejected[Procedure::storey] = storey_decide(fit, h, alpha);
    r.rejected[Procedure::bh] = bh_decide(fit, h, alpha);
    return r;
}

} // namespace dlfdr

#endif // DLFDR_REPORT_HPP
