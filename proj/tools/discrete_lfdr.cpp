#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dlfdr/dlfdr.hpp"
#include "dlfdr/io.hpp"

namespace {

using namespace dlfdr;

enum ExitCode { kOk = 0, kInput = 2, kDegenerate = 3 };

struct Options {
    std::string input;
    std::string family = "zigp";
    std::string cutoff = "c1";
    std::string procedure = "all";
    double alpha = 0.05;
    double em_tol = 1e-8;
    int em_max_iter = 500;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::string format = "tsv";
    bool truth_by_cutoff = false;
    bool c2_literal_argmin = false;
    std::string emit_histogram;
};

std::vector<Family> families_of(const std::string& s)
{
    if (s == "all") {
        return {kAllFamilies.begin(), kAllFamilies.end()};
    }
    return {parse_family(s)};
}

std::vector<Procedure> procedures_of(const std::string& s)
{
    if (s == "all") {
        return {kAllProcedures.begin(), kAllProcedures.end()};
    }
    return {parse_procedure(s)};
}

CutoffConfig cutoff_config(const Options& o)
{
    if (!(o.em_tol > 0.0) || o.em_max_iter < 1) {
        throw input_error("--em-tol must be positive and --em-max-iter at least 1");
    }
    CutoffConfig cfg;
    cfg.em.tol = o.em_tol;
    cfg.em.max_iter = o.em_max_iter;
    cfg.c2_literal_argmin = o.c2_literal_argmin;
    return cfg;
}

CountHistogram load_histogram(const std::string& path)
{
    if (path == "-") {
        return read_histogram_tsv(std::cin);
    }
    return read_histogram_tsv(path);
}

std::optional<count_t> screening_d(const NullFit& fit, const CountHistogram& h)
{
    if (fit.cutoff >= h.max_count() || h.total() < 2) {
        return std::nullopt;
    }
    return d_n(fit, h.total(), fit.cutoff, h.max_count()).d_n;
}

int cmd_fit(const Options& o)
{
    const auto h = load_histogram(o.input);
    const auto choice = parse_cutoff_choice(o.cutoff);
    const auto cfg = cutoff_config(o);
    const auto families = families_of(o.family);

    std::vector<FitSummary> summaries;
    std::vector<ChosenFit> fits;
    for (Family f : families) {
        auto chosen = fit_with_choice(choice, f, h, cfg);
        summaries.push_back({chosen.fit.params, chosen.fit.pi0_hat, chosen.fit.cutoff, screening_d(chosen.fit, h)});
        fits.push_back(std::move(chosen));
    }

    if (o.format == "json") {
        json out = json::array();
        for (std::size_t i = 0; i < fits.size(); ++i) {
            json j = summaries[i];
            j["fit"] = fits[i].fit;
            j["scan"] = fits[i].scan ? json(*fits[i].scan) : json(nullptr);
            out.push_back(std::move(j));
        }
        std::cout << (out.size() == 1 ? out[0] : out).dump(2) << '\n';
        return kOk;
    }
    write_fit_summary_tsv(std::cout, summaries);
    for (const auto& f : fits) {
        if (f.scan) {
            std::cout << "\n# scan family=" << to_string(f.scan->family)
                      << " method=" << to_string(f.scan->method) << '\n';
            write_scan_tsv(std::cout, *f.scan);
        }
    }
    return kOk;
}

int cmd_scan(const Options& o)
{
    const auto h = load_histogram(o.input);
    const auto choice = parse_cutoff_choice(o.cutoff);
    if (!choice.method) {
        throw input_error("scan needs --cutoff c1 or c2");
    }
    const auto cfg = cutoff_config(o);
    std::vector<CutoffScan> scans;
    for (Family f : families_of(o.family)) {
        scans.push_back(select_cutoff(*choice.method, f, h, cfg));
    }
    if (o.format == "json") {
        const json out = scans.size() == 1 ? json(scans[0]) : json(scans);
        std::cout << out.dump(2) << '\n';
        return kOk;
    }
    for (std::size_t i = 0; i < scans.size(); ++i) {
        if (scans.size() > 1) {
            std::cout << (i ? "\n" : "") << "# scan family=" << to_string(scans[i].family) << '\n';
        }
        write_scan_tsv(std::cout, scans[i]);
    }
    return kOk;
}

int cmd_test(const Options& o)
{
    const auto h = load_histogram(o.input);
    const auto choice = parse_cutoff_choice(o.cutoff);
    const auto cfg = cutoff_config(o);
    const auto procs = procedures_of(o.procedure);
    check_alpha(o.alpha);

    std::vector<DecisionReport> reports;
    for (Family f : families_of(o.family)) {
        const auto chosen = fit_with_choice(choice, f, h, cfg);
        DecisionReport r = decide(chosen.fit, h, o.alpha);
        std::erase_if(r.rejected, [&](const auto& kv) {
            return std::find(procs.begin(), procs.end(), kv.first) == procs.end();
        });
        reports.push_back(std::move(r));
    }

    if (o.format == "json") {
        const json out = reports.size() == 1 ? json(reports[0]) : json(reports);
        std::cout << out.dump(2) << '\n';
        return kOk;
    }
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        std::cout << (i ? "\n" : "") << "# family=" << to_string(r.family) << " C=" << r.cutoff
                  << " pi0=" << r.pi0_hat;
        if (r.screening) {
            std::cout << " D=" << r.screening->d_n;
        }
        std::cout << '\n';
        write_report_tsv(std::cout, r, procs);
    }
    std::cout << "\n# positions rejected\nfamily";
    for (Procedure p : procs) {
        std::cout << '\t' << to_string(p);
    }
    std::cout << '\n';
    for (const auto& r : reports) {
        std::cout << to_string(r.family);
        for (Procedure p : procs) {
            std::cout << '\t' << r.positions_rejected(p);
        }
        std::cout << '\n';
    }
    return kOk;
}

int cmd_simulate(const Options& o, const CLI::App& sub)
{
    SimDesign d = load_design(o.input);
    if (o.seed) {
        d.seed = *o.seed;
    }
    if (o.reps) {
        d.reps = *o.reps;
    }
    if (sub.count("--alpha")) {
        d.alpha = o.alpha;
    }
    if (sub.count("--cutoff")) {
        d.cutoff = parse_cutoff_choice(o.cutoff);
    }
    if (sub.count("--family")) {
        d.fit_families = families_of(o.family);
    }
    const auto flags = cutoff_config(o);
    if (sub.count("--em-tol")) {
        d.fit_config.em.tol = flags.em.tol;
    }
    if (sub.count("--em-max-iter")) {
        d.fit_config.em.max_iter = flags.em.max_iter;
    }
    if (o.c2_literal_argmin) {
        d.fit_config.c2_literal_argmin = true;
    }
    if (o.truth_by_cutoff) {
        d.truth = TruthMode::cutoff;
    }
    d.validate();

    RunOptions run_opts;
    run_opts.threads = threads_from_env();
    if (!o.emit_histogram.empty()) {
        std::filesystem::create_directories(o.emit_histogram);
        const std::filesystem::path dir(o.emit_histogram);
        run_opts.on_sample = [dir](std::uint64_t rep, const SimSample& s) {
            std::ofstream out(dir / ("rep_" + std::to_string(rep) + ".tsv"));
            write_histogram_tsv(out, s.histogram);
            if (!out) {
                throw input_error("cannot write histogram for replication " + std::to_string(rep));
            }
        };
    }
    const SimResult res = run(d, run_opts);
    if (o.format == "json") {
        std::cout << json(res).dump(2) << '\n';
    } else {
        write_sim_tsv(std::cout, res);
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Local false discovery rates for discrete count data"};
    app.require_subcommand(1);
    Options o;

    auto add_fit_flags = [&](CLI::App* sub) {
        sub->add_option("input", o.input, "histogram TSV (position,count or count,n_positions); - for stdin")
            ->required();
        sub->add_option("--family", o.family, "zigp | zip | gp | poisson | all")->capture_default_str();
        sub->add_option("--cutoff", o.cutoff, "c1 | c2 | fixed:<k>")->capture_default_str();
        sub->add_option("--em-tol", o.em_tol, "EM stopping tolerance on the log-likelihood")->capture_default_str();
        sub->add_option("--em-max-iter", o.em_max_iter, "EM iteration limit")->capture_default_str();
        sub->add_flag("--c2-literal-argmin", o.c2_literal_argmin, "C2 picks the minimiser");
        sub->add_option("--format", o.format, "tsv | json")
            ->check(CLI::IsMember({"tsv", "json"}))
            ->capture_default_str();
    };

    auto* fit = app.add_subcommand("fit", "fit the null and choose the cut-off");
    add_fit_flags(fit);
    auto* scan = app.add_subcommand("scan", "print the cut-off criterion for every candidate");
    add_fit_flags(scan);
    auto* test = app.add_subcommand("test", "decide which counts are significant");
    add_fit_flags(test);
    test->add_option("--procedure", o.procedure, "one-stage | two-stage | storey | bh | all")->capture_default_str();
    test->add_option("--alpha", o.alpha, "level")->capture_default_str();

    auto* sim = app.add_subcommand("simulate", "Monte-Carlo comparison of the procedures");
    sim->add_option("design", o.input, "design file")->required();
    sim->add_option("--reps", o.reps, "override the replication count");
    sim->add_option("--seed", o.seed, "override the seed (default 42)");
    sim->add_option("--alpha", o.alpha, "override the level");
    sim->add_option("--family", o.family, "override the fitted families");
    sim->add_option("--cutoff", o.cutoff, "override the cut-off choice");
    sim->add_option("--em-tol", o.em_tol, "EM stopping tolerance")->capture_default_str();
    sim->add_option("--em-max-iter", o.em_max_iter, "EM iteration limit")->capture_default_str();
    sim->add_flag("--c2-literal-argmin", o.c2_literal_argmin, "C2 picks the minimiser");
    sim->add_flag("--truth-by-cutoff", o.truth_by_cutoff, "count rejections at or below the fitted C as false");
    sim->add_option("--emit-histogram", o.emit_histogram, "directory for one histogram TSV per replication");
    sim->add_option("--format", o.format, "tsv | json")->check(CLI::IsMember({"tsv", "json"}))->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInput;
    }

    try {
        if (*fit) {
            return cmd_fit(o);
        }
        if (*scan) {
            return cmd_scan(o);
        }
        if (*test) {
            return cmd_test(o);
        }
        return cmd_simulate(o, *sim);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::degenerate ? kDegenerate : kInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInput;
    }
}
