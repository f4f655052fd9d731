#include "fairsample/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <boost/math/distributions/chi_squared.hpp>

namespace fairsample {

HitHistogram tally(std::span<const SampleRecord> records, const GroundStateSet& ground_states,
                   std::string instance_id, std::string sampler) {
    HitHistogram h;
    h.instance_id = std::move(instance_id);
    h.sampler = std::move(sampler);
    h.counts.assign(ground_states.configs.size(), 0);
    std::unordered_map<SpinConfig, std::size_t> index;
    for (std::size_t i = 0; i < ground_states.configs.size(); ++i) index.emplace(ground_states.configs[i], i);
    for (const SampleRecord& r : records) {
        const auto it = index.find(r.config);
        if (it == index.end()) {
            ++h.excited;
        } else {
            ++h.counts[it->second];
            ++h.total;
        }
    }
    return h;
}

HitHistogram tally(const IcaResult& ica, std::string instance_id) {
    HitHistogram h;
    h.instance_id = std::move(instance_id);
    h.sampler = "ica";
    h.counts = ica.hits;
    h.total = std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0});
    return h;
}

RankedHistogram rank_histogram(std::span<const std::uint64_t> counts) {
    RankedHistogram r;
    r.source.resize(counts.size());
    std::iota(r.source.begin(), r.source.end(), std::size_t{0});
    std::stable_sort(r.source.begin(), r.source.end(),
                     [&](std::size_t a, std::size_t b) { return counts[a] < counts[b]; });
    const double n = static_cast<double>(counts.size());
    for (std::size_t k = 0; k < r.source.size(); ++k) {
        r.counts.push_back(counts[r.source[k]]);
        r.x.push_back(static_cast<double>(k + 1) / n);
    }
    return r;
}

namespace {

/// theta_max on ascending counts; |cum N - x total| / (total N) keeps the
/// maximization exact in integers.
double theta_sorted(std::span<const std::uint64_t> sorted, std::uint64_t total) {
    __extension__ using u128 = unsigned __int128;
    const auto n = static_cast<u128>(sorted.size());
    u128 cum = 0;
    u128 best = 0;
    for (std::size_t x = 1; x <= sorted.size(); ++x) {
        cum += sorted[x - 1];
        const u128 a = cum * n;
        const u128 b = static_cast<u128>(x) * total;
        best = std::max(best, a > b ? a - b : b - a);
    }
    return static_cast<double>(best) / (static_cast<double>(total) * static_cast<double>(n));
}

/// Multinomial(n, probs) by sequential conditional binomials.
void draw_multinomial(std::uint64_t n, std::span<const double> probs, Rng& rng, std::vector<std::uint64_t>& out) {
    out.assign(probs.size(), 0);
    double remaining_mass = 1.0;
    std::uint64_t remaining = n;
    for (std::size_t i = 0; i + 1 < probs.size() && remaining > 0; ++i) {
        const double p = remaining_mass > 0.0 ? std::clamp(probs[i] / remaining_mass, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::uint64_t> bin(remaining, p);
        const std::uint64_t k = bin(rng);
        out[i] = k;
        remaining -= k;
        remaining_mass -= probs[i];
    }
    if (!probs.empty()) out.back() += remaining;
}

std::vector<double> resampled_thetas(std::span<const double> probs, std::uint64_t n, int trials, std::uint64_t seed,
                                     Exec exec) {
    std::vector<double> thetas(static_cast<std::size_t>(trials));
#pragma omp parallel if (exec == Exec::Parallel)
    {
        std::vector<std::uint64_t> draw;
#pragma omp for schedule(static)
        for (int t = 0; t < trials; ++t) {
            Rng rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
            draw_multinomial(n, probs, rng, draw);
            std::sort(draw.begin(), draw.end());
            thetas[static_cast<std::size_t>(t)] = theta_sorted(draw, n);
        }
    }
    std::sort(thetas.begin(), thetas.end());
    return thetas;
}

} // namespace

double theta_max(std::span<const std::uint64_t> counts) {
    const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    if (total == 0) throw std::invalid_argument("theta_max needs at least one sample");
    std::vector<std::uint64_t> sorted(counts.begin(), counts.end());
    std::sort(sorted.begin(), sorted.end());
    return theta_sorted(sorted, total);
}

double quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double f = pos - static_cast<double>(lo);
    return sorted[lo] + f * (sorted[hi] - sorted[lo]);
}

BaselineDistribution uniform_baseline(std::uint64_t n_samples, std::size_t n_gs, int trials, std::uint64_t seed,
                                      Exec exec) {
    if (n_samples == 0 || n_gs == 0 || trials < 1) {
        throw std::invalid_argument("uniform baseline needs positive samples, states and trials");
    }
    const std::vector<double> probs(n_gs, 1.0 / static_cast<double>(n_gs));
    BaselineDistribution out;
    out.thetas = resampled_thetas(probs, n_samples, trials, seed, exec);
    out.mean = std::accumulate(out.thetas.begin(), out.thetas.end(), 0.0) / trials;
    out.ci95 = {quantile(out.thetas, 0.025), quantile(out.thetas, 0.975)};
    return out;
}

Interval bootstrap_ci(std::span<const std::uint64_t> counts, int resamples, std::uint64_t seed, Exec exec) {
    if (resamples < 1000) throw std::invalid_argument("bootstrap needs at least 1000 resamples");
    const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    if (total == 0) throw std::invalid_argument("bootstrap needs at least one sample");
    std::vector<double> probs(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        probs[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    }
    // Relabelling the states before ranking cannot change theta_max, so the
    // index shuffle of the resampled histogram is omitted.
    const auto thetas = resampled_thetas(probs, total, resamples, seed, exec);
    return {quantile(thetas, 0.025), quantile(thetas, 0.975)};
}

double chi_square_uniform_pvalue(std::span<const std::uint64_t> counts) {
    if (counts.size() < 2) return 1.0;
    const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    if (total == 0) throw std::invalid_argument("chi-square needs at least one sample");
    const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
    double stat = 0.0;
    for (std::uint64_t c : counts) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

FairnessReport analyze(const HitHistogram& histogram, int n_sites, const FairnessOptions& options, Exec exec) {
    FairnessReport r;
    r.instance_id = histogram.instance_id;
    r.sampler = histogram.sampler;
    r.n_sites = n_sites;
    r.n_gs = histogram.n_gs();
    r.total = histogram.total;
    r.excited = histogram.excited;
    r.ranked = rank_histogram(histogram.counts);
    if (r.total == 0 || r.n_gs == 0) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        r.theta_max = r.baseline_theta_max = nan;
        r.ci = r.baseline_ci = {nan, nan};
        r.chi2_pvalue = nan;
        return r;
    }
    r.theta_max = theta_sorted(r.ranked.counts, r.total);
    r.ci = bootstrap_ci(histogram.counts, options.resamples, mix_seed(options.seed, 1), exec);
    const BaselineDistribution base =
        uniform_baseline(r.total, r.n_gs, options.baseline_trials, mix_seed(options.seed, 2), exec);
    r.baseline_theta_max = base.mean;
    r.baseline_ci = base.ci95;
    r.chi2_pvalue = chi_square_uniform_pvalue(histogram.counts);
    return r;
}

std::vector<FairnessReport> min_solutions_filter(std::span<const FairnessReport> reports, std::uint64_t floor) {
    std::vector<FairnessReport> out;
    for (const auto& r : reports) {
        if (r.total >= floor) out.push_back(r);
    }
    return out;
}

Comparison compare_runs(std::span<const FairnessReport> a, std::span<const FairnessReport> b) {
    std::map<std::string, const FairnessReport*> right;
    for (const auto& r : b) {
        if (r.total > 0) right[r.instance_id] = &r;
    }
    Comparison out;
    for (const auto& l : a) {
        if (l.total == 0) continue;
        const auto it = right.find(l.instance_id);
        if (it == right.end()) continue;
        out.rows.push_back({l.instance_id, l.theta_max, l.ci, it->second->theta_max, it->second->ci});
    }
    std::sort(out.rows.begin(), out.rows.end(),
              [](const ComparisonRow& x, const ComparisonRow& y) { return x.instance_id < y.instance_id; });
    out.disjoint = out.rows.empty();
    return out;
}

} // namespace fairsample
