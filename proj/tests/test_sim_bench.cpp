#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <sstream>

#include "dlfdr/rng.hpp"
#include "dlfdr/sim_bench.hpp"

using namespace dlfdr;
using Catch::Approx;

namespace {

SimDesign zigp_design(std::uint64_t seed, count_t offset = 10)
{
    SimDesign d;
    d.null = NullParams::zigp(0.8, 1.5, 0.3);
    d.nonnull = {NonNullKind::geometric, 0.08, 0, offset};
    d.pi0 = 0.8;
    d.N = 1000;
    d.seed = seed;
    return d;
}

} // namespace

TEST_CASE("Philox matches the published known-answer vectors")
{
    using B = std::array<std::uint32_t, 4>;
    CHECK(Philox4x32::block(B{0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::block(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::block(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("Philox streams are reproducible and distinct")
{
    Philox4x32 a(42, 0), b(42, 0), c(42, 1), d(43, 0);
    bool differ_c = false, differ_d = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        CHECK(x == b());
        differ_c |= x != c();
        differ_d |= x != d();
    }
    CHECK(differ_c);
    CHECK(differ_d);
    Philox4x32 u(1, 1);
    for (int i = 0; i < 1000; ++i) {
        const double v = u.uniform();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
        CHECK(u.uniform_pos() > 0.0);
    }
}

TEST_CASE("null sampler reproduces the null pmf")
{
    const auto p = NullParams::zigp(0.4, 1.0, 0.2);
    const NullSampler draw(p);
    Philox4x32 rng(5, 0);
    constexpr int n = 200000;
    std::map<count_t, int> tally;
    for (int i = 0; i < n; ++i) {
        ++tally[draw(rng)];
    }
    for (count_t j = 0; j <= 6; ++j) {
        const double expect = null_pmf(p, j);
        const double sd = std::sqrt(expect * (1.0 - expect) / n);
        INFO("j=" << j);
        CHECK(std::abs(tally[j] / static_cast<double>(n) - expect) < 5.0 * sd);
    }
}

TEST_CASE("non-null samplers")
{
    Philox4x32 rng(9, 0);
    const NonNullSampler geo({NonNullKind::geometric, 0.08, 0, 3});
    const NonNullSampler bin({NonNullKind::binomial, 0.2, 250, 0});
    constexpr int n = 100000;
    double gsum = 0.0, bsum = 0.0;
    count_t gmin = 1000;
    for (int i = 0; i < n; ++i) {
        const count_t g = geo(rng);
        gmin = std::min(gmin, g);
        gsum += static_cast<double>(g);
        bsum += static_cast<double>(bin(rng));
    }
    CHECK(gmin == 3);
    CHECK(gsum / n == Approx(3.0 + 0.92 / 0.08).epsilon(0.02));
    CHECK(bsum / n == Approx(50.0).epsilon(0.005));
    CHECK_THROWS_AS(NonNullSampler({NonNullKind::binomial, 0.2, 0, 0}), Error);
    CHECK_THROWS_AS(NonNullSampler({NonNullKind::geometric, 0.0, 0, 0}), Error);
}

TEST_CASE("generate: labels, fractions and reproducibility")
{
    auto d = zigp_design(11, 0);
    const auto s = generate(d, 0);
    REQUIRE(s.positions.size() == 1000);
    REQUIRE(s.is_null.size() == 1000);
    const double null_fraction =
        static_cast<double>(std::count(s.is_null.begin(), s.is_null.end(), true)) / 1000.0;
    CHECK(std::abs(null_fraction - 0.8) <= 0.04);

    const auto again = generate(d, 0);
    CHECK(again.positions == s.positions);
    CHECK(again.is_null == s.is_null);
    CHECK(again.histogram.counts() == s.histogram.counts());
    CHECK(generate(d, 1).positions != s.positions);

    d.pi0 = 1.0;
    const auto all_null = generate(d, 0);
    CHECK(std::all_of(all_null.is_null.begin(), all_null.is_null.end(), [](bool b) { return b; }));
}

TEST_CASE("fdp_tpr")
{
    const std::vector<count_t> pos{0, 0, 9, 9};
    const std::vector<bool> lab{true, true, false, false};
    const auto c = fdp_tpr(RejectionSet{9}, pos, lab);
    CHECK(c.V == 0);
    CHECK(c.R == 2);
    CHECK(c.S == 2);
    CHECK(c.T == 0);
    CHECK(c.fdp == 0.0);
    CHECK(c.tpr == 1.0);

    const auto none = fdp_tpr(RejectionSet{}, pos, lab);
    CHECK(none.R == 0);
    CHECK(none.fdp == 0.0);
    CHECK(none.tpr == 0.0);

    const auto mixed = fdp_tpr(RejectionSet{0, 9}, pos, lab);
    CHECK(mixed.fdp == 0.5);

    const std::vector<bool> all_null{true, true, true, true};
    const auto u = fdp_tpr(RejectionSet{9}, pos, all_null);
    CHECK(u.tpr_undefined);
    CHECK(u.tpr == 1.0);
    CHECK(u.fdp == 1.0);

    CHECK(labels_by_cutoff(pos, 5) == std::vector<bool>{true, true, false, false});
    const std::vector<bool> short_labels{true};
    CHECK_THROWS_AS(fdp_tpr(RejectionSet{}, pos, short_labels), Error);
}

TEST_CASE("run: bitwise reproducible and thread-count independent")
{
    auto d = zigp_design(42, 10);
    d.reps = 4;
    d.fit_families = {Family::zip, Family::poisson};
    const auto a = run(d);
    const auto b = run(d);
    CHECK(a == b);
    RunOptions opt;
    opt.threads = 3;
    CHECK(run(d, opt) == a);

    CHECK(a.rows.size() == 2 * kAllProcedures.size());
    for (const auto& r : a.rows) {
        CHECK(r.FDR_hat >= 0.0);
        CHECK(r.FDR_hat <= 1.0);
        CHECK(r.TPR_hat >= 0.0);
        CHECK(r.TPR_hat <= 1.0);
        CHECK(r.sd_R >= 0.0);
        CHECK(r.reps_used + r.reps_failed == 4);
    }
    for (Family f : d.fit_families) {
        CHECK(a.row(Procedure::two_stage, f).R_bar >= a.row(Procedure::one_stage, f).R_bar);
    }
    CHECK(a.subset_violations == 0);
    CHECK(a.subset_checks == 8);
}

TEST_CASE("run: per-replication statistics match a direct recomputation")
{
    auto d = zigp_design(5, 10);
    d.reps = 3;
    d.fit_families = {Family::poisson};
    const auto res = run(d);
    double sum_r = 0.0, sum_fdp = 0.0;
    for (std::uint64_t rep = 0; rep < 3; ++rep) {
        const auto s = generate(d, rep);
        const auto fit = select_c1(Family::poisson, s.histogram).chosen_fit();
        const auto report = decide(fit, s.histogram, 0.05);
        const auto c = fdp_tpr(report.rejected.at(Procedure::storey), s.positions, s.is_null);
        sum_r += static_cast<double>(c.R);
        sum_fdp += c.fdp;
    }
    CHECK(res.row(Procedure::storey, Family::poisson).R_bar == Approx(sum_r / 3.0).epsilon(1e-14));
    CHECK(res.row(Procedure::storey, Family::poisson).FDR_hat == Approx(sum_fdp / 3.0).epsilon(1e-14));
}

TEST_CASE("run: all-null designs flag undefined TPR")
{
    auto d = zigp_design(3, 10);
    d.pi0 = 1.0;
    d.reps = 5;
    d.fit_families = {Family::zip};
    const auto res = run(d);
    CHECK(res.tpr_undefined_reps == 5);
    CHECK(res.row(Procedure::one_stage, Family::zip).TPR_hat == 1.0);
}

TEST_CASE("run: failing fits are counted, not dropped")
{
    // Every position at count 0 or 1: ZIGP has no admissible cut-off.
    SimDesign d;
    d.null = NullParams::zip(0.9, 0.01);
    d.nonnull = {NonNullKind::binomial, 0.5, 1, 0};
    d.pi0 = 0.5;
    d.N = 50;
    d.reps = 3;
    d.fit_families = {Family::zigp, Family::poisson};
    const auto res = run(d);
    CHECK(res.row(Procedure::one_stage, Family::zigp).reps_failed == 3);
    CHECK(res.row(Procedure::one_stage, Family::zigp).reps_used == 0);
    CHECK(res.row(Procedure::one_stage, Family::poisson).reps_used == 3);
}

TEST_CASE("run: sample hook sees every replication")
{
    auto d = zigp_design(8, 10);
    d.reps = 3;
    d.fit_families = {Family::poisson};
    std::vector<std::uint64_t> seen;
    RunOptions opt;
    opt.on_sample = [&](std::uint64_t rep, const SimSample& s) {
        seen.push_back(rep);
        CHECK(s.histogram.total() == 1000);
    };
    run(d, opt);
    CHECK(seen == std::vector<std::uint64_t>{0, 1, 2});
}

TEST_CASE("design parser")
{
    std::istringstream in(R"(# ZIGP null with a shifted geometric alternative
null.family = zigp
null.eta = 0.8
null.lambda = 1.5
null.theta = 0.3
nonnull.kind = geometric
nonnull.p = 0.08
nonnull.offset = 10
pi0 = 0.8
N = 1000
reps = 300
alpha = 0.05
cutoff = c1
fit = zigp, poisson
seed = 7   # trailing comment
truth = cutoff
em.tol = 1e-9
em.max_iter = 200
)");
    const auto d = parse_design(in);
    CHECK(d.null == NullParams::zigp(0.8, 1.5, 0.3));
    CHECK(d.nonnull == NonNull{NonNullKind::geometric, 0.08, 0, 10});
    CHECK(d.reps == 300);
    CHECK(d.seed == 7);
    CHECK(d.fit_families == std::vector<Family>{Family::zigp, Family::poisson});
    CHECK(d.truth == TruthMode::cutoff);
    CHECK(d.fit_config.em.tol == 1e-9);
    CHECK(d.fit_config.em.max_iter == 200);

    auto input_error_for = [](const std::string& text) {
        std::istringstream s(text);
        try {
            parse_design(s);
        } catch (const Error& e) {
            return e.kind() == ErrorKind::input;
        }
        return false;
    };
    const std::string base = "null.family = zip\nnull.eta = 0.4\nnull.lambda = 1.5\nnonnull.kind = binomial\n"
                              "nonnull.trials = 250\nnonnull.p = 0.2\n";
    CHECK_FALSE(input_error_for(base + "pi0 = 0.8\n"));
    CHECK(input_error_for(base));                              // pi0 missing
    CHECK(input_error_for(base + "pi0 = 0\n"));
    CHECK(input_error_for(base + "pi0 = 1.5\n"));
    CHECK(input_error_for(base + "pi0 = 0.8\npi0 = 0.7\n"));   // duplicate
    CHECK(input_error_for(base + "pi0 = 0.8\ncolour = red\n"));
    CHECK(input_error_for(base + "pi0 = 0.8\nN = 5\n"));
    CHECK(input_error_for(base + "pi0 = 0.8\nreps = 0\n"));
    CHECK(input_error_for(base + "pi0 = 0.8\nalpha = 1\n"));
    CHECK(input_error_for(base + "pi0 = 0.8\ncutoff = c9\n"));
    CHECK(input_error_for(base + "pi0 = 0.8\nfit = nb\n"));
    CHECK(input_error_for(base + "pi0 = 0.8\nN = ten\n"));
    CHECK(input_error_for(base + "pi0 = 0.8\njust words\n"));
    CHECK(input_error_for("null.family = zip\nnull.eta = 1.2\nnull.lambda = 1\nnonnull.kind = geometric\n"
                          "nonnull.p = 0.1\npi0 = 0.8\n"));
    CHECK_THROWS_AS(load_design("/nonexistent/design.txt"), Error);
}
