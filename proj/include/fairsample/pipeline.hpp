#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fairsample/generator.hpp"
#include "fairsample/io.hpp"
#include "fairsample/samplers.hpp"

namespace fairsample::pipeline {

namespace fs = std::filesystem;

/// Invalid arguments that pass the option parser (unknown sampler,
/// negative noise, ...). run_cli maps it to kExitUsage.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Inputs that disagree with each other (instance hash mismatch).
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;     ///< parse, I/O or integrity error
inline constexpr int kExitUsage = 2;
inline constexpr int kExitShortfall = 3;   ///< gen accepted fewer instances than requested
inline constexpr int kExitNoHits = 4;      ///< sample found no ground state at all

/// Sweep budgets of the 1:10 annealing-time comparison.
inline constexpr std::uint64_t kBudgetT20 = 100;
inline constexpr std::uint64_t kBudgetT200 = 1000;

/// "t20", "t200" or a positive integer.
std::uint64_t parse_sweep_budget(const std::string& text);

// ---------------------------------------------------------------------------
// gen

struct GenRequest {
    int c = 2;
    int count = 20;
    std::uint64_t seed = 0;
    fs::path out = ".";
    Defects defects;
    GenerationOptions options;
};

struct GeneratedEntry {
    fs::path file;
    std::string hash;
    std::uint64_t seed = 0;
    DegeneracyVerdict verdict;
    std::int64_t min_energy = 0;
    int attempts = 0;
};

struct GenSummary {
    int requested = 0;
    std::vector<GeneratedEntry> accepted;
    int attempts = 0;
    int restarts = 0;
    int rejections = 0;
    int failed_slots = 0;  ///< slots that exhausted max_attempts
    fs::path manifest;
};

/// Slot i draws with seed mix_seed(seed, i); slots run in parallel and files
/// are written in slot order (c<c>_<i>.inst) plus gen_manifest.json.
GenSummary cmd_gen(const GenRequest& request);

// ---------------------------------------------------------------------------
// count

struct CountRequest {
    fs::path instance;
    fs::path out;  ///< file, or directory for <stem>.gs
    std::size_t cap = kDefaultEnumerationCap;
    PTParams ica;  ///< fallback parameters past the exact oracle's reach
};

struct CountResult {
    io::GroundStateFile ground_states;
    fs::path file;
};

CountResult cmd_count(const CountRequest& request);

// ---------------------------------------------------------------------------
// sample

struct SampleRequest {
    fs::path input;  ///< instance or noisy instance file
    std::string sampler = "sqa";  ///< sa, sqa or ica
    int gauges = 10;
    int reads = 100;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> sweep_budget;
    double sa_hot = 20.0;  ///< geometric SA schedule ends, raw energy units
    double sa_cold = 0.3;
    SqaParams sqa;
    PTParams ica;
    /// Optional ground-state file used only for the hit-fraction report.
    std::optional<fs::path> ground_states;
    fs::path out;  ///< file, or directory for <stem>.<sampler>.jsonl
};

struct SampleSummary {
    fs::path file;
    std::size_t records = 0;
    std::optional<double> hit_fraction;
    std::optional<IcaStatus> ica_status;
};

/// sa/sqa: run_with_gauges. ica: ica_enumerate with seed, one record per
/// visit; gauges and reads are ignored and an unconverged run writes a
/// header only.
SampleSummary cmd_sample(const SampleRequest& request);

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeRequest {
    std::vector<fs::path> records;  ///< files or directories of *.jsonl
    std::vector<fs::path> ground_states;
    std::uint64_t floor = 50;
    int bootstrap = 10000;
    int baseline_trials = 10000;
    std::uint64_t seed = 0;
    fs::path out = ".";
    /// Two record sets joined per instance; both are analyzed too.
    std::optional<std::pair<fs::path, fs::path>> compare;
};

struct AnalyzeResult {
    std::vector<FairnessReport> reports;
    std::optional<Comparison> comparison;
};

/// Records are grouped by (instance hash, sampler) and merged. A records
/// file whose instance hash has no ground-state file raises IntegrityError.
AnalyzeResult cmd_analyze(const AnalyzeRequest& request);

// ---------------------------------------------------------------------------
// noise

struct NoiseRequest {
    fs::path instance;
    double sigma_j = 0.0;
    double sigma_h = 0.0;
    std::uint64_t seed = 0;
    fs::path out;  ///< file, or directory for <stem>.noisy
};

fs::path cmd_noise(const NoiseRequest& request);

// ---------------------------------------------------------------------------
// experiments

struct NoisePoint {
    double sigma_j = 0.0;
    double sigma_h = 0.0;

    bool operator==(const NoisePoint&) const = default;
};

/// One end-to-end study: gen -> count -> sample -> analyze for every size,
/// sampler and noise point, with every stage seed derived from `seed`.
struct ExperimentManifest {
    std::vector<int> sizes = {2};
    std::vector<int> instances_per_size = {10};  ///< N_sa, aligned with sizes
    std::vector<std::string> samplers = {"ica", "sqa"};
    std::vector<std::uint64_t> sweep_budgets = {kBudgetT20};  ///< sa/sqa; the first also drives noise runs
    int gauges = 10;
    int reads = 100;
    double sa_hot = 20.0;
    double sa_cold = 0.3;
    SqaParams sqa;
    PTParams ica;
    std::vector<NoisePoint> noise_grid;  ///< sqa on noisy copies, judged against base states
    std::uint64_t seed = 0;
    std::uint64_t floor = 50;
    int bootstrap = 10000;
    int baseline_trials = 10000;
    GenerationOptions generation;

    void validate() const;
    std::string to_json() const;
    static ExperimentManifest from_json(const std::string& text);

    /// Desk-scale defaults.
    static ExperimentManifest desk();
    /// Published sizes N = 512..968 (c = 8..11) with their instance counts,
    /// PT parameters and the 100 gauges x 1000 reads protocol.
    static ExperimentManifest production();
};

/// sigma_J, sigma_h in {0, 0.05, 0.1} x j_min, all nine combinations.
std::vector<NoisePoint> relative_noise_grid(double j_min = 5.0);

/// Published instance counts by N; throws std::invalid_argument otherwise.
int production_instances(int n_sites);

struct ExperimentResult {
    fs::path manifest;  ///< experiment.json with stage seeds and artifact hashes
    std::vector<fs::path> artifacts;
    bool shortfall = false;
};

ExperimentResult run_experiment(const ExperimentManifest& manifest, const fs::path& out);

/// Re-hashes every artifact listed in experiment.json; returns the paths
/// that are missing or changed.
std::vector<std::string> verify_experiment(const fs::path& experiment_json);

// ---------------------------------------------------------------------------

/// Command-line entry point; returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace fairsample::pipeline
