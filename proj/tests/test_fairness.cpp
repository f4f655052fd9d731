#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairsample/fairness.hpp"

using namespace fairsample;

namespace {

using Counts = std::vector<std::uint64_t>;

/// Direct transcription of the definition in floating point.
double naive_theta(Counts c) {
    std::sort(c.begin(), c.end());
    const double total = static_cast<double>(std::accumulate(c.begin(), c.end(), std::uint64_t{0}));
    double cum = 0.0;
    double best = 0.0;
    for (std::size_t x = 1; x <= c.size(); ++x) {
        cum += static_cast<double>(c[x - 1]);
        best = std::max(best, std::abs(cum / total - static_cast<double>(x) / static_cast<double>(c.size())));
    }
    return best;
}

Counts random_counts(Rng& rng, std::size_t n, std::uint64_t max) {
    std::uniform_int_distribution<std::uint64_t> d(0, max);
    Counts c(n);
    for (auto& v : c) v = d(rng);
    if (std::accumulate(c.begin(), c.end(), std::uint64_t{0}) == 0) c[0] = 1;
    return c;
}

FairnessReport report(const std::string& id, const Counts& counts, std::uint64_t seed = 1) {
    HitHistogram h;
    h.instance_id = id;
    h.sampler = "synthetic";
    h.counts = counts;
    h.total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    FairnessOptions opt;
    opt.resamples = 2000;
    opt.baseline_trials = 2000;
    opt.seed = seed;
    return analyze(h, 32, opt);
}

} // namespace

TEST_CASE("rank histogram sorting", "[fairness]") {
    const Counts c{7, 2, 11};
    const RankedHistogram r = rank_histogram(c);
    CHECK(r.counts == Counts{2, 7, 11});
    CHECK(r.source == std::vector<std::size_t>{1, 0, 2});
    CHECK(r.x == std::vector<double>{1.0 / 3, 2.0 / 3, 1.0});

    const Counts ties{3, 1, 3, 1};
    const RankedHistogram t = rank_histogram(ties);
    CHECK(t.counts == Counts{1, 1, 3, 3});
    CHECK(t.source == std::vector<std::size_t>{1, 3, 0, 2});  // canonical order among ties

    Rng rng = make_rng(2);
    for (int i = 0; i < 200; ++i) {
        const Counts x = random_counts(rng, 12, 40);
        const RankedHistogram s = rank_histogram(x);
        CHECK(std::is_sorted(s.counts.begin(), s.counts.end()));
        CHECK(std::accumulate(s.counts.begin(), s.counts.end(), std::uint64_t{0}) ==
              std::accumulate(x.begin(), x.end(), std::uint64_t{0}));
    }
}

TEST_CASE("theta_max analytic cases", "[fairness]") {
    CHECK(theta_max(Counts{10, 10, 10}) == 0.0);
    CHECK(theta_max(Counts{0, 0, 30}) == 2.0 / 3.0);
    CHECK(theta_max(Counts{1, 2, 3}) == 1.0 / 6.0);
    CHECK(theta_max(Counts{3, 2, 1}) == 1.0 / 6.0);
    for (std::size_t n : {1, 2, 6, 12, 24, 96}) {
        Counts single(n, 0);
        single[n / 2] = 1;
        CHECK(theta_max(single) == static_cast<double>(n - 1) / static_cast<double>(n));
    }
    CHECK_THROWS_AS(theta_max(Counts{0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(theta_max(Counts{}), std::invalid_argument);
}

TEST_CASE("theta_max agrees with the definition", "[fairness][property]") {
    Rng rng = make_rng(3);
    for (int i = 0; i < 2000; ++i) {
        std::uniform_int_distribution<std::size_t> n(1, 96);
        const Counts c = random_counts(rng, n(rng), 500);
        const double t = theta_max(c);
        CHECK(std::abs(t - naive_theta(c)) < 1e-12);
        CHECK(t >= 0.0);
        CHECK(t <= 1.0);
    }
}

TEST_CASE("theta_max vanishes exactly on uniform counts", "[fairness][property]") {
    Rng rng = make_rng(4);
    std::uniform_int_distribution<std::uint64_t> level(1, 1000);
    for (int i = 0; i < 500; ++i) {
        std::uniform_int_distribution<std::size_t> n(1, 48);
        const std::size_t k = n(rng);
        CHECK(theta_max(Counts(k, level(rng))) == 0.0);
        Counts c = random_counts(rng, k, 20);
        const bool uniform = std::all_of(c.begin(), c.end(), [&](std::uint64_t v) { return v == c[0]; });
        CHECK((theta_max(c) == 0.0) == uniform);
    }
}

TEST_CASE("theta_max is permutation and scale invariant", "[fairness][property]") {
    Rng rng = make_rng(5);
    std::uniform_int_distribution<std::uint64_t> factor(2, 1000);
    for (int i = 0; i < 500; ++i) {
        Counts c = random_counts(rng, 24, 100);
        const double t = theta_max(c);
        std::shuffle(c.begin(), c.end(), rng);
        CHECK(theta_max(c) == t);
        const std::uint64_t f = factor(rng);
        for (auto& v : c) v *= f;
        CHECK(theta_max(c) == t);
    }
}

TEST_CASE("quantile interpolation", "[fairness]") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 1.0) == 5.0);
    CHECK(quantile(v, 0.5) == 3.0);
    CHECK(quantile(v, 0.125) == Catch::Approx(1.5));
    CHECK_THROWS_AS(quantile(std::vector<double>{}, 0.5), std::invalid_argument);
}

TEST_CASE("uniform baseline edge cases", "[fairness][baseline]") {
    const auto one = uniform_baseline(100, 1, 200, 1);
    CHECK(one.mean == 0.0);
    CHECK(one.ci95.high == 0.0);
    for (std::size_t n : {2, 6, 24}) {
        const auto single = uniform_baseline(1, n, 200, 2);
        for (double t : single.thetas) CHECK(t == static_cast<double>(n - 1) / static_cast<double>(n));
    }
    CHECK_THROWS_AS(uniform_baseline(0, 6, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(uniform_baseline(10, 6, 0, 1), std::invalid_argument);
}

TEST_CASE("uniform baseline shrinks with the sample size", "[fairness][baseline][statistics]") {
    double previous = 1.0;
    for (std::uint64_t n : {100, 1000, 10000}) {
        const auto b = uniform_baseline(n, 12, 4000, 7);
        CHECK(b.mean < previous);
        CHECK(b.ci95.low <= b.mean);
        CHECK(b.mean <= b.ci95.high);
        CHECK(std::is_sorted(b.thetas.begin(), b.thetas.end()));
        previous = b.mean;
    }
    // Fluctuations scale as 1 / sqrt(n): two decades shrink the mean ~10x.
    const double ratio = uniform_baseline(100, 12, 4000, 8).mean / uniform_baseline(10000, 12, 4000, 8).mean;
    CHECK(ratio > 7.0);
    CHECK(ratio < 13.0);
}

TEST_CASE("uniform baseline is deterministic and policy independent", "[fairness][baseline]") {
    const auto a = uniform_baseline(500, 24, 1000, 9, Exec::Serial);
    const auto b = uniform_baseline(500, 24, 1000, 9, Exec::Parallel);
    CHECK(a.thetas == b.thetas);
    CHECK(a.mean == b.mean);
}

TEST_CASE("bootstrap of a point mass collapses", "[fairness][bootstrap]") {
    const Interval ci = bootstrap_ci(Counts{0, 0, 0, 50}, 1000, 1);
    CHECK(ci.high - ci.low < 0.01);
    CHECK(ci.low == 0.75);
    CHECK(ci.high == 0.75);
    CHECK_THROWS_AS(bootstrap_ci(Counts{1, 2}, 999, 1), std::invalid_argument);
    CHECK_THROWS_AS(bootstrap_ci(Counts{0, 0}, 1000, 1), std::invalid_argument);
}

TEST_CASE("bootstrap width scales as one over root total", "[fairness][bootstrap][statistics]") {
    const std::vector<double> rates{0.05, 0.1, 0.15, 0.2, 0.22, 0.28};
    auto counts_at = [&](std::uint64_t total) {
        Counts c;
        for (double r : rates) c.push_back(static_cast<std::uint64_t>(std::llround(r * static_cast<double>(total))));
        return c;
    };
    const Interval small = bootstrap_ci(counts_at(100), 4000, 3);
    const Interval large = bootstrap_ci(counts_at(10000), 4000, 3);
    const double ratio = (small.high - small.low) / (large.high - large.low);
    CHECK(ratio > 7.0);
    CHECK(ratio < 13.0);
    CHECK(small.low <= small.high);
}

TEST_CASE("bootstrap is deterministic and policy independent", "[fairness][bootstrap]") {
    const Counts c{3, 9, 14, 20, 2, 7};
    const Interval a = bootstrap_ci(c, 2000, 4, Exec::Serial);
    const Interval b = bootstrap_ci(c, 2000, 4, Exec::Parallel);
    CHECK(a.low == b.low);
    CHECK(a.high == b.high);
}

TEST_CASE("bootstrap coverage on separated rates", "[fairness][bootstrap][statistics]") {
    // Geometric rates, ratio 1.3, N_GS = 12; population theta from the rates.
    std::vector<double> p(12);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::pow(1.3, static_cast<double>(i));
    const double z = std::accumulate(p.begin(), p.end(), 0.0);
    double cum = 0.0;
    double truth = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] /= z;
        cum += p[i];
        truth = std::max(truth, std::abs(cum - static_cast<double>(i + 1) / 12.0));
    }
    int covered = 0;
    constexpr int kTrials = 100;
    for (int t = 0; t < kTrials; ++t) {
        Rng rng = make_rng(91, static_cast<std::uint64_t>(t));
        std::discrete_distribution<std::size_t> d(p.begin(), p.end());
        Counts c(12, 0);
        for (int s = 0; s < 1000; ++s) ++c[d(rng)];
        covered += bootstrap_ci(c, 1000, static_cast<std::uint64_t>(t)).contains(truth) ? 1 : 0;
    }
    CHECK(covered >= 85);
}

TEST_CASE("chi-square uniformity p-value", "[fairness]") {
    CHECK(chi_square_uniform_pvalue(Counts{10, 10, 10}) == Catch::Approx(1.0));
    CHECK(chi_square_uniform_pvalue(Counts{5}) == 1.0);
    // (10, 20): statistic 10/3 with one degree of freedom, p = erfc(sqrt(5/3)).
    CHECK(chi_square_uniform_pvalue(Counts{10, 20}) == Catch::Approx(std::erfc(std::sqrt(5.0 / 3.0))));
    CHECK(chi_square_uniform_pvalue(Counts{0, 0, 30}) < 1e-10);
    CHECK_THROWS_AS(chi_square_uniform_pvalue(Counts{0, 0}), std::invalid_argument);
}

TEST_CASE("tally separates hits from excited samples", "[fairness]") {
    GroundStateSet gs;
    gs.min_energy = -10;
    gs.configs = {SpinConfig::from_hex("4:0"), SpinConfig::from_hex("4:5"), SpinConfig::from_hex("4:a"),
                  SpinConfig::from_hex("4:f")};
    gs.count = 4;
    std::vector<SampleRecord> recs;
    for (const char* hex : {"4:5", "4:5", "4:f", "4:1", "4:0", "4:5", "4:3"}) {
        SampleRecord r;
        r.config = SpinConfig::from_hex(hex);
        recs.push_back(r);
    }
    const HitHistogram h = tally(recs, gs, "inst", "sqa");
    CHECK(h.counts == Counts{1, 3, 0, 1});
    CHECK(h.total == 5);
    CHECK(h.excited == 2);
    CHECK(h.n_gs() == 4);
    CHECK(h.instance_id == "inst");

    IcaResult ica;
    ica.ground_states = gs;
    ica.hits = {50, 60, 70, 80};
    const HitHistogram hi = tally(ica, "inst");
    CHECK(hi.total == 260);
    CHECK(hi.sampler == "ica");
}

TEST_CASE("analyze assembles a report", "[fairness]") {
    const FairnessReport r = report("a", Counts{4, 40, 10, 20, 30, 6});
    CHECK(r.n_gs == 6);
    CHECK(r.total == 110);
    CHECK(r.ranked.counts == Counts{4, 6, 10, 20, 30, 40});
    CHECK(r.theta_max == theta_max(Counts{4, 40, 10, 20, 30, 6}));
    CHECK(r.ci.low <= r.ci.high);
    CHECK(r.baseline_ci.low <= r.baseline_theta_max);
    CHECK(r.baseline_theta_max <= r.baseline_ci.high);
    CHECK(r.theta_max > r.baseline_ci.high);
    CHECK(r.excited_rate() == 0.0);
    const FairnessReport again = report("a", Counts{4, 40, 10, 20, 30, 6});
    CHECK(again.ci.low == r.ci.low);
    CHECK(again.baseline_theta_max == r.baseline_theta_max);

    const FairnessReport empty = report("e", Counts{0, 0, 0});
    CHECK(std::isnan(empty.theta_max));
    CHECK(empty.total == 0);
}

TEST_CASE("minimum-solutions filter", "[fairness]") {
    std::vector<FairnessReport> batch;
    for (std::uint64_t t : {49, 50, 0, 120, 7}) {
        FairnessReport r;
        r.total = t;
        batch.push_back(r);
    }
    CHECK(min_solutions_filter(batch).size() == 2);
    CHECK(min_solutions_filter(batch, 0).size() == batch.size());
    CHECK(min_solutions_filter(std::span<const FairnessReport>(batch.data(), 1)).empty());
}

TEST_CASE("compare_runs joins on instance", "[fairness]") {
    const std::vector<FairnessReport> a{report("i1", Counts{5, 10, 15}), report("i2", Counts{9, 9, 12}),
                                        report("i3", Counts{1, 1, 40})};
    const Comparison same = compare_runs(a, a);
    REQUIRE(same.rows.size() == 3);
    CHECK_FALSE(same.disjoint);
    for (const auto& row : same.rows) CHECK(row.theta_a == row.theta_b);

    const std::vector<FairnessReport> b{report("i3", Counts{10, 10, 22}), report("i4", Counts{3, 3, 3}),
                                        report("i1", Counts{0, 0, 0})};
    const Comparison join = compare_runs(a, b);
    REQUIRE(join.rows.size() == 1);
    CHECK(join.rows[0].instance_id == "i3");

    const std::vector<FairnessReport> c{report("z", Counts{1, 2})};
    const Comparison none = compare_runs(a, c);
    CHECK(none.rows.empty());
    CHECK(none.disjoint);
}

TEST_CASE("compare_runs reproduces an injected gap", "[fairness]") {
    // Population thetas 0 and 1/4 (rates 1/8, 1/8, 3/8, 3/8 against uniform).
    const std::vector<FairnessReport> a{report("g", Counts{500, 500, 500, 500})};
    const std::vector<FairnessReport> b{report("g", Counts{250, 250, 750, 750})};
    const Comparison cmp = compare_runs(a, b);
    REQUIRE(cmp.rows.size() == 1);
    const auto& row = cmp.rows[0];
    const double gap = row.theta_b - row.theta_a;
    CHECK(gap == 0.25);
    CHECK(row.ci_b.contains(0.25));
    CHECK(row.ci_b.low - row.ci_a.high < 0.25);
}
