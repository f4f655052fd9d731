#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairsample/instance.hpp"
#include "fairsample/ising.hpp"
#include "fairsample/oracle.hpp"
#include "fairsample/rng.hpp"
#include "fairsample/spin_config.hpp"

namespace fairsample {

/// One annealing read: the returned configuration and its energy on the
/// Hamiltonian that was sampled.
struct AnnealResult {
    SpinConfig config;
    double energy = 0.0;
};

/// Sequential single-spin Metropolis sweep over all sites at inverse
/// temperature beta; zero-cost flips are taken with probability 1/2.
/// `energy` is kept current.
template <class T>
void metropolis_sweep(const IsingModel<T>& model, Spins& spins, T& energy, double beta, Rng& rng);

// ---------------------------------------------------------------------------
// Simulated annealing

struct AnnealSchedule {
    std::vector<double> temperatures;
    int sweeps_per_temperature = 1;

    /// steps temperatures spaced geometrically from hot down to cold.
    static AnnealSchedule geometric(double hot, double cold, int steps, int sweeps_per_temperature = 1);

    /// Throws std::invalid_argument unless non-empty, positive and strictly
    /// decreasing.
    void validate() const;
    std::uint64_t sweeps() const {
        return temperatures.size() * static_cast<std::uint64_t>(sweeps_per_temperature);
    }
};

/// Random start, Metropolis sweeps down the schedule; returns the lowest
/// energy configuration seen.
template <class T>
AnnealResult simulated_annealing(const IsingModel<T>& model, const AnnealSchedule& schedule, Rng& rng);

// ---------------------------------------------------------------------------
// Simulated quantum annealing (discrete-time path integral)

struct SqaParams {
    int trotter_slices = 32;
    int sweeps = 100;  ///< the t20 budget; t200 is 10x
    double temperature = 0.1;
    /// Breakpoints of the transverse field; interpolated linearly over the
    /// sweeps. Positive, non-increasing, final <= 1e-2 * initial.
    std::vector<double> gamma_schedule = {3.0, 0.01};
    /// temperature and gamma are in units of the largest |J| of the model.
    bool scale_by_max_coupling = true;

    void validate() const;
    double gamma_at(int sweep) const;

    /// Ferromagnetic coupling between neighbouring Trotter slices,
    /// -(T / 2) ln tanh(gamma / (P T)).
    static double slice_coupling(double gamma, int slices, double temperature);
};

/// trotter_slices replicas of the problem (each weighted 1/P) coupled along
/// imaginary time with slice_coupling(gamma); gamma annealed down the
/// schedule at fixed temperature. Returns the lowest-energy slice at the end.
/// With a single slice the imaginary-time coupling drops out and the
/// dynamics is Metropolis at fixed temperature.
template <class T>
AnnealResult sqa_sample(const IsingModel<T>& model, const SqaParams& params, Rng& rng);

// ---------------------------------------------------------------------------
// Parallel tempering with isoenergetic cluster moves

struct PTParams {
    int b = 19;  ///< log2 of the sweep count
    int n_temps = 33;
    double t_min = 0.06;
    double t_max = 3.05;
    int n_ica = 18;  ///< lowest temperatures receiving cluster moves
    int replica_sets = 4;
    int min_hits = 50;
    /// Ground-state visits are recorded at the lowest temperature every
    /// record_every sweeps (thinning against autocorrelation).
    int record_every = 32;
    /// Ladder temperatures are in units of the largest |J| of the instance
    /// (the ladder above is quoted for couplings normalized to |J| <= 1).
    bool scale_by_max_coupling = true;
    std::uint64_t seed = 0;

    std::uint64_t sweeps() const { return std::uint64_t{1} << b; }
    /// Geometric ladder from t_min to t_max.
    std::vector<double> temperatures() const;
    void validate() const;

    /// Simulation parameters for the production lattice sizes
    /// N in {512, 648, 800, 968}. Throws std::invalid_argument otherwise.
    static PTParams table_row(int n_sites);
};

/// exp((beta_i - beta_j)(E_i - E_j)) capped at 1.
double exchange_acceptance(double beta_i, double beta_j, double e_i, double e_j);

template <class T>
struct ReplicaChain {
    std::vector<Spins> replicas;  ///< replicas[k] sits at temperature slot k
    std::vector<T> energies;
    std::vector<Rng> slot_rngs;   ///< one stream per temperature slot
    Rng exchange_rng;
    std::uint64_t exchanges_attempted = 0;
    std::uint64_t exchanges_accepted = 0;
};

template <class T>
struct PTState {
    std::vector<double> betas;  ///< increasing temperature order, so decreasing beta
    std::vector<ReplicaChain<T>> chains;
    /// Integer models only: boltzmann[k][d] = exp(-betas[k] d) for every
    /// attainable positive flip cost d.
    std::vector<std::vector<double>> boltzmann;
};

template <class T>
PTState<T> init_pt_state(const IsingModel<T>& model, std::span<const double> temperatures, int chains,
                         std::uint64_t seed);

/// One Metropolis sweep of every replica, then exchange attempts between
/// neighbouring temperature slots of each chain.
template <class T>
void pt_sweep(PTState<T>& state, const IsingModel<T>& model, Exec exec = Exec::Parallel);

/// Exchange attempts only (slot k with k + 1, k ascending).
template <class T>
void pt_exchange(ReplicaChain<T>& chain, std::span<const double> betas);

/// Houdayer-style move: pick a uniformly random site where the replicas
/// disagree, grow its connected cluster of disagreeing sites over active
/// couplers, flip it in both. Conserves energy_a + energy_b. Returns the
/// cluster size (0 when the replicas are identical).
template <class T>
std::size_t isoenergetic_cluster_move(const IsingModel<T>& model, Spins& a, Spins& b, T& energy_a, T& energy_b,
                                      Rng& rng);

/// SpinConfig form of the move.
std::pair<SpinConfig, SpinConfig> isoenergetic_cluster_move(const Instance& instance, const SpinConfig& a,
                                                            const SpinConfig& b, Rng& rng);

enum class IcaStatus {
    Converged,
    Unconverged,    ///< replica sets disagreed on the minimum at the checkpoint
    HitFloorUnmet,  ///< extension cap reached before every state had min_hits
};

const char* to_string(IcaStatus status);

struct IcaResult {
    GroundStateSet ground_states;  ///< exact == false
    std::vector<std::uint64_t> hits;  ///< aligned with ground_states.configs
    IcaStatus status = IcaStatus::Converged;
    std::vector<std::int64_t> chain_minima;  ///< per replica set, first half
    std::uint64_t sweeps = 0;
    /// A lower energy appeared while recording; earlier records were dropped.
    bool minimum_shifted = false;
};

/// Parallel tempering + isoenergetic cluster moves on replica_sets chains
/// (paired (0,1), (2,3), ... for cluster moves). After sweeps()/2 the
/// chains must agree on the lowest energy seen in their n_ica coldest
/// slots; the second half records minimum-energy visits at the coldest
/// slot. The run doubles (up to 4 x sweeps()) until each recorded state has
/// min_hits visits.
IcaResult ica_enumerate(const Instance& instance, const PTParams& params, Exec exec = Exec::Parallel);

// ---------------------------------------------------------------------------
// Gauge-averaged sampling

enum class SamplerKind { SimulatedAnnealing, Sqa };

struct SamplerConfig {
    SamplerKind kind = SamplerKind::Sqa;
    AnnealSchedule sa = AnnealSchedule::geometric(20.0, 0.3, 100, 1);  ///< raw energy units
    SqaParams sqa;

    std::string id() const;
    /// Canonical text of the parameters; hashed into SampleRecord.params_hash.
    std::string params_text() const;
    std::string params_hash() const;
    std::uint64_t sweep_budget() const;
};

struct SampleRecord {
    std::string sampler;
    std::string params_hash;
    int gauge = 0;
    SpinConfig config;
    double energy = 0.0;
    std::uint64_t sweeps = 0;
    std::uint64_t seed = 0;

    bool operator==(const SampleRecord&) const = default;
};

/// For each gauge: transform the instance, draw `reads` samples, map each
/// configuration back to the base frame. Read r of gauge g uses the stream
/// mix_seed(seed, g * reads + r), so Exec::Serial and Exec::Parallel agree.
std::vector<SampleRecord> run_with_gauges(const Instance& instance, const SamplerConfig& sampler,
                                          std::span<const GaugeVector> gauges, int reads, std::uint64_t seed,
                                          Exec exec = Exec::Parallel);
std::vector<SampleRecord> run_with_gauges(const NoisyInstance& instance, const SamplerConfig& sampler,
                                          std::span<const GaugeVector> gauges, int reads, std::uint64_t seed,
                                          Exec exec = Exec::Parallel);

/// Draws `gauges` random gauges from the seed, then runs as above.
std::vector<GaugeVector> draw_gauges(const ChimeraGraph& graph, int gauges, std::uint64_t seed);
std::vector<SampleRecord> run_with_gauges(const Instance& instance, const SamplerConfig& sampler, int gauges,
                                          int reads, std::uint64_t seed, Exec exec = Exec::Parallel);
std::vector<SampleRecord> run_with_gauges(const NoisyInstance& instance, const SamplerConfig& sampler, int gauges,
                                          int reads, std::uint64_t seed, Exec exec = Exec::Parallel);

} // namespace fairsample
