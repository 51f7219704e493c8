#ifndef DLFDR_IO_HPP
#define DLFDR_IO_HPP

#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cutoff_select.hpp"
#include "em_fit.hpp"
#include "error.hpp"
#include "histogram.hpp"
#include "null_models.hpp"
#include "report.hpp"
#include "screening.hpp"
#include "sim_bench.hpp"

// JSON mapping for the result types. A score of -inf is written as null and read
// back as -inf, so parse(serialize(x)) == x holds for every value the library emits.

namespace dlfdr {

using json = nlohmann::json;

namespace detail {

inline json real_to_json(double x)
{
    if (std::isfinite(x)) {
        return x;
    }
    if (x == -INFINITY) {
        return nullptr;
    }
    return x > 0 ? json("inf") : json("nan");
}

inline double real_from_json(const json& j)
{
    if (j.is_null()) {
        return -INFINITY;
    }
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") {
            return INFINITY;
        }
        if (s == "nan") {
            return NAN;
        }
        throw input_error("bad real value '" + s + "'");
    }
    return j.get<double>();
}

} // namespace detail

inline void to_json(json& j, const NullParams& p)
{
    j = json{{"family", to_string(p.family)}, {"eta", p.eta}, {"lambda", p.lambda}, {"theta", p.theta}};
}

inline void from_json(const json& j, NullParams& p)
{
    p.family = parse_family(j.at("family").get<std::string>());
    p.eta = j.at("eta").get<double>();
    p.lambda = j.at("lambda").get<double>();
    p.theta = j.at("theta").get<double>();
    if (!p.valid()) {
        throw input_error("invalid GP parameters");
    }
}

inline void to_json(json& j, const NullFit& f)
{
    json trace = json::array();
    for (double v : f.loglik_trace) {
        trace.push_back(detail::real_to_json(v));
    }
    j = json{{"params", f.params},      {"C", f.cutoff},
             {"pi0", f.pi0_hat},        {"loglik_trace", trace},
             {"converged", f.converged}, {"iterations", f.iterations}};
}

inline void from_json(const json& j, NullFit& f)
{
    f.params = j.at("params").get<NullParams>();
    f.cutoff = j.at("C").get<count_t>();
    f.pi0_hat = j.at("pi0").get<double>();
    f.loglik_trace.clear();
    for (const auto& v : j.at("loglik_trace")) {
        f.loglik_trace.push_back(detail::real_from_json(v));
    }
    f.converged = j.at("converged").get<bool>();
    f.iterations = j.at("iterations").get<int>();
}

inline void to_json(json& j, const ScanEntry& e)
{
    j = json{{"nu", e.nu},
             {"fit", e.fit ? json(*e.fit) : json(nullptr)},
             {"score", detail::real_to_json(e.score)},
             {"loglik", detail::real_to_json(e.loglik)}};
}

inline void from_json(const json& j, ScanEntry& e)
{
    e.nu = j.at("nu").get<count_t>();
    e.fit = j.at("fit").is_null() ? std::nullopt : std::optional<NullFit>(j.at("fit").get<NullFit>());
    e.score = detail::real_from_json(j.at("score"));
    e.loglik = detail::real_from_json(j.at("loglik"));
}

inline void to_json(json& j, const CutoffScan& s)
{
    j = json{{"family", to_string(s.family)},
             {"method", to_string(s.method)},
             {"chosen", s.chosen},
             {"per_nu", s.per_nu}};
}

inline void from_json(const json& j, CutoffScan& s)
{
    s.family = parse_family(j.at("family").get<std::string>());
    const auto m = j.at("method").get<std::string>();
    if (m != "c1" && m != "c2") {
        throw input_error("unknown cut-off method '" + m + "'");
    }
    s.method = m == "c1" ? CutoffMethod::c1 : CutoffMethod::c2;
    s.chosen = j.at("chosen").get<count_t>();
    s.per_nu = j.at("per_nu").get<std::vector<ScanEntry>>();
}

inline void to_json(json& j, const ScreeningThreshold& t)
{
    j = json{{"D", t.d_n},
             {"branch", to_string(t.branch)},
             {"lambda_term", t.lambda_term},
             {"log_n_term", t.log_n_term},
             {"c_plus_1", t.c_plus_1},
             {"max_count", t.max_count},
             {"pre_clamp", t.pre_clamp},
             {"ceiled", t.ceiled}};
}

inline void from_json(const json& j, ScreeningThreshold& t)
{
    t.d_n = j.at("D").get<count_t>();
    const auto b = j.at("branch").get<std::string>();
    if (b != "gp" && b != "poisson") {
        throw input_error("unknown screening branch '" + b + "'");
    }
    t.branch = b == "gp" ? ScreeningBranch::gp_type : ScreeningBranch::poisson_type;
    t.lambda_term = j.at("lambda_term").get<double>();
    t.log_n_term = j.at("log_n_term").get<double>();
    t.c_plus_1 = j.at("c_plus_1").get<count_t>();
    t.max_count = j.at("max_count").get<count_t>();
    t.pre_clamp = j.at("pre_clamp").get<double>();
    t.ceiled = j.at("ceiled").get<double>();
}

inline void to_json(json& j, const CountRow& r)
{
    j = json{{"count", r.count}, {"n_positions", r.n_positions}, {"f_hat", r.f_hat},
             {"f0_hat", r.f0_hat}, {"lfdr", r.lfdr},              {"p_value", r.p_value}};
}

inline void from_json(const json& j, CountRow& r)
{
    r.count = j.at("count").get<count_t>();
    r.n_positions = j.at("n_positions").get<count_t>();
    r.f_hat = j.at("f_hat").get<double>();
    r.f0_hat = j.at("f0_hat").get<double>();
    r.lfdr = j.at("lfdr").get<double>();
    r.p_value = j.at("p_value").get<double>();
}

inline void to_json(json& j, const DecisionReport& r)
{
    json rejected = json::object();
    for (const auto& [proc, set] : r.rejected) {
        rejected[std::string(to_string(proc))] = set;
    }
    json totals = json::object();
    for (const auto& [proc, set] : r.rejected) {
        totals[std::string(to_string(proc))] = r.positions_rejected(proc);
    }
    j = json{{"family", to_string(r.family)},
             {"C", r.cutoff},
             {"pi0", r.pi0_hat},
             {"alpha", r.alpha},
             {"per_count", r.per_count},
             {"rejected", rejected},
             {"positions_rejected", totals},
             {"screening", r.screening ? json(*r.screening) : json(nullptr)}};
}

inline void from_json(const json& j, DecisionReport& r)
{
    r.family = parse_family(j.at("family").get<std::string>());
    r.cutoff = j.at("C").get<count_t>();
    r.pi0_hat = j.at("pi0").get<double>();
    r.alpha = j.at("alpha").get<double>();
    r.per_count = j.at("per_count").get<std::vector<CountRow>>();
    r.rejected.clear();
    for (const auto& [name, set] : j.at("rejected").items()) {
        r.rejected[parse_procedure(name)] = set.get<RejectionSet>();
    }
    r.screening = j.at("screening").is_null()
                      ? std::nullopt
                      : std::optional<ScreeningThreshold>(j.at("screening").get<ScreeningThreshold>());
}

inline void to_json(json& j, const SimRow& r)
{
    j = json{{"procedure", to_string(r.procedure)},
             {"family", to_string(r.family)},
             {"R", r.R_bar},
             {"FDR", r.FDR_hat},
             {"TPR", r.TPR_hat},
             {"sd_R", r.sd_R},
             {"sd_FDR", r.sd_FDR},
             {"sd_TPR", r.sd_TPR},
             {"reps_used", r.reps_used},
             {"reps_failed", r.reps_failed},
             {"mean_C", r.mean_cutoff}};
}

inline void from_json(const json& j, SimRow& r)
{
    r.procedure = parse_procedure(j.at("procedure").get<std::string>());
    r.family = parse_family(j.at("family").get<std::string>());
    r.R_bar = j.at("R").get<double>();
    r.FDR_hat = j.at("FDR").get<double>();
    r.TPR_hat = j.at("TPR").get<double>();
    r.sd_R = j.at("sd_R").get<double>();
    r.sd_FDR = j.at("sd_FDR").get<double>();
    r.sd_TPR = j.at("sd_TPR").get<double>();
    r.reps_used = j.at("reps_used").get<int>();
    r.reps_failed = j.at("reps_failed").get<int>();
    r.mean_cutoff = j.at("mean_C").get<double>();
}

inline void to_json(json& j, const SimResult& r)
{
    j = json{{"reps", r.reps},
             {"tpr_undefined_reps", r.tpr_undefined_reps},
             {"subset_violations", r.subset_violations},
             {"subset_checks", r.subset_checks},
             {"rows", r.rows}};
}

inline void from_json(const json& j, SimResult& r)
{
    r.reps = j.at("reps").get<int>();
    r.tpr_undefined_reps = j.at("tpr_undefined_reps").get<int>();
    r.subset_violations = j.at("subset_violations").get<int>();
    r.subset_checks = j.at("subset_checks").get<int>();
    r.rows = j.at("rows").get<std::vector<SimRow>>();
}

/// Parses JSON text into T; malformed or mistyped input becomes an input error.
template <class T>
T parse_json(const std::string& text)
{
    try {
        return json::parse(text).get<T>();
    } catch (const json::exception& e) {
        throw input_error(std::string("bad JSON: ") + e.what());
    }
}

template <class T>
std::string to_json_text(const T& x, int indent = 2)
{
    return json(x).dump(indent);
}

// ---------------------------------------------------------------- TSV

namespace detail {

inline std::string fmt_real(double x)
{
    if (std::isnan(x)) {
        return "NA";
    }
    if (std::isinf(x)) {
        return x < 0 ? "-inf" : "inf";
    }
    std::ostringstream os;
    os << std::setprecision(10) << x;
    return os.str();
}

} // namespace detail

inline void write_histogram_tsv(std::ostream& os, const CountHistogram& h)
{
    os << "count\tn_positions\n";
    for (auto [j, nj] : h.counts()) {
        os << j << '\t' << nj << '\n';
    }
}

/// One row per nu; skipped values carry NA parameters and a -inf score.
inline void write_scan_tsv(std::ostream& os, const CutoffScan& scan)
{
    os << "nu\teta\tlambda\ttheta\tpi0\tscore\tloglik\n";
    for (const auto& e : scan.per_nu) {
        os << e.nu << '\t';
        if (e.fit) {
            os << detail::fmt_real(e.fit->params.eta) << '\t' << detail::fmt_real(e.fit->params.lambda) << '\t'
               << detail::fmt_real(e.fit->params.theta) << '\t' << detail::fmt_real(e.fit->pi0_hat) << '\t';
        } else {
            os << "NA\tNA\tNA\tNA\t";
        }
        os << detail::fmt_real(e.score) << '\t' << detail::fmt_real(e.loglik) << '\n';
    }
}

/// Per-count report; one reject_<procedure> column per entry of `procs`.
inline void write_report_tsv(std::ostream& os, const DecisionReport& r,
                             std::span<const Procedure> procs = kAllProcedures)
{
    os << "count\tn_positions\tf_hat\tf0_hat\tlfdr\tp_value";
    for (Procedure p : procs) {
        std::string name(to_string(p));
        std::erase(name, '-');
        os << "\treject_" << name;
    }
    os << '\n';
    for (const auto& row : r.per_count) {
        os << row.count << '\t' << row.n_positions << '\t' << detail::fmt_real(row.f_hat) << '\t'
           << detail::fmt_real(row.f0_hat) << '\t' << detail::fmt_real(row.lfdr) << '\t'
           << detail::fmt_real(row.p_value);
        for (Procedure p : procs) {
            const auto it = r.rejected.find(p);
            os << '\t' << (it != r.rejected.end() && it->second.contains(row.count) ? 1 : 0);
        }
        os << '\n';
    }
}

/// One summary line per family: eta lambda theta pi C D.
struct FitSummary {
    NullParams params;
    double pi0_hat = 1.0;
    count_t cutoff = 0;
    std::optional<count_t> d;  ///< empty when C = K
};

inline void write_fit_summary_tsv(std::ostream& os, const std::vector<FitSummary>& rows)
{
    os << "family\teta\tlambda\ttheta\tpi\tC\tD\n";
    for (const auto& r : rows) {
        os << to_string(r.params.family) << '\t' << detail::fmt_real(r.params.eta) << '\t'
           << detail::fmt_real(r.params.lambda) << '\t' << detail::fmt_real(r.params.theta) << '\t'
           << detail::fmt_real(r.pi0_hat) << '\t' << r.cutoff << '\t';
        if (r.d) {
            os << *r.d;
        } else {
            os << "NA";
        }
        os << '\n';
    }
}

inline void to_json(json& j, const FitSummary& s)
{
    j = json{{"family", to_string(s.params.family)},
             {"eta", s.params.eta},
             {"lambda", s.params.lambda},
             {"theta", s.params.theta},
             {"pi0", s.pi0_hat},
             {"C", s.cutoff},
             {"D", s.d ? json(*s.d) : json(nullptr)}};
}

/// One row per (procedure, family).
inline void write_sim_tsv(std::ostream& os, const SimResult& r)
{
    os << "procedure\tfamily\tR\tFDR\tTPR\tsd_R\tsd_FDR\tsd_TPR\treps_used\treps_failed\n";
    for (const auto& row : r.rows) {
        os << to_string(row.procedure) << '\t' << to_string(row.family) << '\t' << detail::fmt_real(row.R_bar)
           << '\t' << detail::fmt_real(row.FDR_hat) << '\t' << detail::fmt_real(row.TPR_hat) << '\t'
           << detail::fmt_real(row.sd_R) << '\t' << detail::fmt_real(row.sd_FDR) << '\t'
           << detail::fmt_real(row.sd_TPR) << '\t' << row.reps_used << '\t' << row.reps_failed << '\n';
    }
}

} // namespace dlfdr

#endif // DLFDR_IO_HPP
