#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairsample/oracle.hpp"
#include "fairsample/rng.hpp"
#include "fairsample/samplers.hpp"

namespace fairsample {

/// Ground-state hit counts of one sampler on one instance. counts[i] belongs
/// to the i-th configuration of the ground-state set (canonical order);
/// samples outside the set are tallied as excited.
struct HitHistogram {
    std::string instance_id;
    std::string sampler;
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;    ///< sum of counts
    std::uint64_t excited = 0;  ///< samples that are not verified ground states

    std::size_t n_gs() const { return counts.size(); }
};

/// Aggregates records over all gauges; a record counts as a hit when its
/// configuration is in the set.
HitHistogram tally(std::span<const SampleRecord> records, const GroundStateSet& ground_states,
                   std::string instance_id, std::string sampler);

/// ICA visit counts as a histogram over its own recovered set.
HitHistogram tally(const IcaResult& ica, std::string instance_id);

struct RankedHistogram {
    std::vector<std::uint64_t> counts;  ///< ascending
    std::vector<std::size_t> source;    ///< counts[r] came from input index source[r]
    std::vector<double> x;              ///< (r + 1) / N_GS
};

/// Stable ascending sort: ties keep the canonical configuration order.
RankedHistogram rank_histogram(std::span<const std::uint64_t> counts);

/// max_x |F~(x) - x / N_GS| over the rank-sorted counts, where F~ is the
/// empirical cumulative distribution. The input is rank-sorted internally.
/// Throws std::invalid_argument when the total is zero.
double theta_max(std::span<const std::uint64_t> counts);

struct Interval {
    double low = 0.0;
    double high = 0.0;

    bool contains(double v) const { return low <= v && v <= high; }
};

/// Linear-interpolated quantile of sorted values, q in [0, 1].
double quantile(std::span<const double> sorted, double q);

struct BaselineDistribution {
    std::vector<double> thetas;  ///< ascending
    double mean = 0.0;
    Interval ci95;
};

/// Theta_max of n_samples uniform draws over n_gs states, repeated `trials`
/// times. Trial t uses stream mix_seed(seed, t).
BaselineDistribution uniform_baseline(std::uint64_t n_samples, std::size_t n_gs, int trials, std::uint64_t seed,
                                      Exec exec = Exec::Parallel);

/// Percentile bootstrap: resample `total` hits from the empirical
/// distribution, recompute theta_max; returns the 2.5 and 97.5 percentiles.
/// Requires resamples >= 1000 and a positive total.
Interval bootstrap_ci(std::span<const std::uint64_t> counts, int resamples, std::uint64_t seed,
                      Exec exec = Exec::Parallel);

/// Upper-tail p-value of Pearson's chi-square statistic against the uniform
/// distribution over the states (N_GS - 1 degrees of freedom); 1 when
/// N_GS == 1.
double chi_square_uniform_pvalue(std::span<const std::uint64_t> counts);

struct FairnessOptions {
    int resamples = 10000;
    int baseline_trials = 10000;
    std::uint64_t seed = 0;
};

struct FairnessReport {
    std::string instance_id;
    std::string sampler;
    int n_sites = 0;
    std::size_t n_gs = 0;
    std::uint64_t total = 0;
    std::uint64_t excited = 0;
    RankedHistogram ranked;
    double theta_max = 0.0;
    Interval ci;  ///< percentile bootstrap, 95 %
    double baseline_theta_max = 0.0;  ///< mean over uniform trials at the same total
    Interval baseline_ci;
    double chi2_pvalue = 1.0;

    double excited_rate() const {
        const std::uint64_t all = total + excited;
        return all == 0 ? 0.0 : static_cast<double>(excited) / static_cast<double>(all);
    }
};

/// Full report. When the histogram has no hits, theta_max and the intervals
/// are NaN and the report is kept for bookkeeping.
FairnessReport analyze(const HitHistogram& histogram, int n_sites, const FairnessOptions& options = {},
                       Exec exec = Exec::Parallel);

/// Keeps reports with total >= floor.
std::vector<FairnessReport> min_solutions_filter(std::span<const FairnessReport> reports,
                                                 std::uint64_t floor = 50);

struct ComparisonRow {
    std::string instance_id;
    double theta_a = 0.0;
    Interval ci_a;
    double theta_b = 0.0;
    Interval ci_b;
};

struct Comparison {
    std::vector<ComparisonRow> rows;  ///< sorted by instance_id
    /// No instance appears (with hits) in both runs.
    bool disjoint = false;
};

/// Inner join on instance_id over reports with total > 0 on both sides.
Comparison compare_runs(std::span<const FairnessReport> a, std::span<const FairnessReport> b);

} // namespace fairsample
