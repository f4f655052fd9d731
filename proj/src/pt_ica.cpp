#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <limits>
#include <string>
#include <type_traits>
#include <unordered_map>

#include "fairsample/samplers.hpp"

namespace fairsample {

std::vector<double> PTParams::temperatures() const {
    std::vector<double> t(static_cast<std::size_t>(n_temps));
    for (int k = 0; k < n_temps; ++k) {
        const double x = n_temps == 1 ? 0.0 : static_cast<double>(k) / (n_temps - 1);
        t[static_cast<std::size_t>(k)] = t_min * std::pow(t_max / t_min, x);
    }
    return t;
}

void PTParams::validate() const {
    if (b < 1 || b > 40) throw std::invalid_argument("b must lie in [1, 40]");
    if (!(t_min > 0.0) || !(t_min < t_max)) throw std::invalid_argument("need 0 < t_min < t_max");
    if (n_temps < 2) throw std::invalid_argument("need at least two temperatures");
    if (n_ica < 1 || n_ica > n_temps) throw std::invalid_argument("need 0 < n_ica <= n_temps");
    if (replica_sets < 2) throw std::invalid_argument("need at least two replica sets");
    if (min_hits < 1) throw std::invalid_argument("min_hits must be positive");
    if (record_every < 1) throw std::invalid_argument("record_every must be positive");
}

PTParams PTParams::table_row(int n_sites) {
    switch (n_sites) {
    case 512:
    case 648:
    case 800:
    case 968: return PTParams{};
    default: throw std::invalid_argument("no parameter row for N = " + std::to_string(n_sites));
    }
}

double exchange_acceptance(double beta_i, double beta_j, double e_i, double e_j) {
    const double x = (beta_i - beta_j) * (e_i - e_j);
    return x >= 0.0 ? 1.0 : std::exp(x);
}

namespace {

Spins random_spins(int n, Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    Spins s(static_cast<std::size_t>(n));
    for (auto& v : s) v = coin(rng) ? 1 : -1;
    return s;
}

} // namespace

template <class T>
PTState<T> init_pt_state(const IsingModel<T>& model, std::span<const double> temperatures, int chains,
                         std::uint64_t seed) {
    PTState<T> state;
    const std::size_t nt = temperatures.size();
    for (double t : temperatures) state.betas.push_back(1.0 / t);
    state.chains.resize(static_cast<std::size_t>(chains));
    for (std::size_t c = 0; c < state.chains.size(); ++c) {
        auto& ch = state.chains[c];
        const std::uint64_t base = c * (nt + 1);
        for (std::size_t k = 0; k < nt; ++k) {
            ch.slot_rngs.push_back(make_rng(seed, base + k));
            ch.replicas.push_back(random_spins(model.size(), ch.slot_rngs.back()));
            ch.energies.push_back(model.energy(ch.replicas.back()));
        }
        ch.exchange_rng = make_rng(seed, base + nt);
    }
    if constexpr (std::is_integral_v<T>) {
        const auto dmax = static_cast<std::size_t>(model.max_flip_cost());
        for (double beta : state.betas) {
            std::vector<double> table(dmax + 1);
            for (std::size_t d = 0; d <= dmax; ++d) table[d] = std::exp(-beta * static_cast<double>(d));
            state.boltzmann.push_back(std::move(table));
        }
    }
    return state;
}

template <class T>
void pt_exchange(ReplicaChain<T>& chain, std::span<const double> betas) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t k = 0; k + 1 < betas.size(); ++k) {
        const double p = exchange_acceptance(betas[k], betas[k + 1], static_cast<double>(chain.energies[k]),
                                             static_cast<double>(chain.energies[k + 1]));
        ++chain.exchanges_attempted;
        if (p >= 1.0 || unit(chain.exchange_rng) < p) {
            std::swap(chain.replicas[k], chain.replicas[k + 1]);
            std::swap(chain.energies[k], chain.energies[k + 1]);
            ++chain.exchanges_accepted;
        }
    }
}

namespace {

/// metropolis_sweep with exp(-beta d) read from a table; same decisions.
template <class T>
void tabulated_sweep(const IsingModel<T>& model, Spins& spins, T& energy, const std::vector<double>& table, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = model.size();
    for (int i = 0; i < n; ++i) {
        const T d = model.delta(spins, i);
        if (d < T{0} || unit(rng) < (d == T{0} ? 0.5 : table[static_cast<std::size_t>(d)])) {
            spins[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(-spins[static_cast<std::size_t>(i)]);
            energy += d;
        }
    }
}

template <class T>
void metropolis_all(PTState<T>& state, const IsingModel<T>& model, Exec exec) {
    const auto nt = static_cast<long>(state.betas.size());
    const long total = static_cast<long>(state.chains.size()) * nt;
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
    for (long w = 0; w < total; ++w) {
        auto& ch = state.chains[static_cast<std::size_t>(w / nt)];
        const auto k = static_cast<std::size_t>(w % nt);
        if constexpr (std::is_integral_v<T>) {
            tabulated_sweep(model, ch.replicas[k], ch.energies[k], state.boltzmann[k], ch.slot_rngs[k]);
        } else {
            metropolis_sweep(model, ch.replicas[k], ch.energies[k], state.betas[k], ch.slot_rngs[k]);
        }
    }
}

template <class T>
void exchange_all(PTState<T>& state, Exec exec) {
    const auto nc = static_cast<long>(state.chains.size());
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
    for (long c = 0; c < nc; ++c) pt_exchange(state.chains[static_cast<std::size_t>(c)], state.betas);
}

} // namespace

template <class T>
void pt_sweep(PTState<T>& state, const IsingModel<T>& model, Exec exec) {
    metropolis_all(state, model, exec);
    exchange_all(state, exec);
}

template <class T>
std::size_t isoenergetic_cluster_move(const IsingModel<T>& model, Spins& a, Spins& b, T& energy_a, T& energy_b,
                                      Rng& rng) {
    const int n = model.size();
    std::vector<int> differ;
    for (int i = 0; i < n; ++i) {
        if (a[static_cast<std::size_t>(i)] != b[static_cast<std::size_t>(i)]) differ.push_back(i);
    }
    if (differ.empty()) return 0;
    std::uniform_int_distribution<std::size_t> pick(0, differ.size() - 1);
    const int seed_site = differ[pick(rng)];

    std::vector<std::uint8_t> in_cluster(static_cast<std::size_t>(n), 0);
    std::vector<int> cluster{seed_site};
    in_cluster[static_cast<std::size_t>(seed_site)] = 1;
    for (std::size_t head = 0; head < cluster.size(); ++head) {
        for (const auto& bond : model.bonds(cluster[head])) {
            const auto j = static_cast<std::size_t>(bond.site);
            if (!in_cluster[j] && a[j] != b[j]) {
                in_cluster[j] = 1;
                cluster.push_back(bond.site);
            }
        }
    }

    // Flipping C changes E by 2 sum_{i in C} s_i (sum_{j not in C} J_ij s_j + h_i).
    T da{0};
    T db{0};
    for (int i : cluster) {
        T fa = model.field(i);
        T fb = model.field(i);
        for (const auto& bond : model.bonds(i)) {
            const auto j = static_cast<std::size_t>(bond.site);
            if (in_cluster[j]) continue;
            fa += bond.coupling * a[j];
            fb += bond.coupling * b[j];
        }
        const auto ui = static_cast<std::size_t>(i);
        da += 2 * a[ui] * fa;
        db += 2 * b[ui] * fb;
    }
    for (int i : cluster) {
        const auto ui = static_cast<std::size_t>(i);
        a[ui] = static_cast<std::int8_t>(-a[ui]);
        b[ui] = static_cast<std::int8_t>(-b[ui]);
    }
    energy_a += da;
    energy_b += db;
    return cluster.size();
}

std::pair<SpinConfig, SpinConfig> isoenergetic_cluster_move(const Instance& instance, const SpinConfig& a,
                                                            const SpinConfig& b, Rng& rng) {
    const BaseModel model(instance);
    if (a.size() != static_cast<std::size_t>(model.size()) || b.size() != a.size()) {
        throw std::invalid_argument("replica size does not match instance");
    }
    Spins sa = a.to_spins();
    Spins sb = b.to_spins();
    std::int64_t ea = model.energy(sa);
    std::int64_t eb = model.energy(sb);
    isoenergetic_cluster_move(model, sa, sb, ea, eb, rng);
    return {SpinConfig::from_spins(sa), SpinConfig::from_spins(sb)};
}

#define FAIRSAMPLE_PT_INSTANTIATE(T)                                                                             \
    template PTState<T> init_pt_state(const IsingModel<T>&, std::span<const double>, int, std::uint64_t);       \
    template void pt_exchange(ReplicaChain<T>&, std::span<const double>);                                      \
    template void pt_sweep(PTState<T>&, const IsingModel<T>&, Exec);                                           \
    template std::size_t isoenergetic_cluster_move(const IsingModel<T>&, Spins&, Spins&, T&, T&, Rng&);
FAIRSAMPLE_PT_INSTANTIATE(std::int64_t)
FAIRSAMPLE_PT_INSTANTIATE(double)
#undef FAIRSAMPLE_PT_INSTANTIATE

const char* to_string(IcaStatus status) {
    switch (status) {
    case IcaStatus::Converged: return "converged";
    case IcaStatus::Unconverged: return "unconverged";
    case IcaStatus::HitFloorUnmet: return "hit_floor_unmet";
    }
    return "unknown";
}

namespace {

class IcaRun {
public:
    IcaRun(const Instance& instance, const PTParams& params, Exec exec)
        : model_(instance), params_(params), exec_(exec) {
        auto temps = params.temperatures();
        const auto scale = params.scale_by_max_coupling ? model_.max_coupling() : std::int64_t{1};
        if (scale > 0) {
            for (double& t : temps) t *= static_cast<double>(scale);
        }
        state_ = init_pt_state(model_, temps, params.replica_sets, params.seed);
    }

    /// Metropolis, cluster moves on the n_ica coldest slots of each chain
    /// pair, then exchanges.
    void sweep() {
        metropolis_all(state_, model_, exec_);
        const long pairs = static_cast<long>(state_.chains.size() / 2);
        const auto nica = static_cast<std::size_t>(params_.n_ica);
#pragma omp parallel for schedule(static) if (exec_ == Exec::Parallel)
        for (long p = 0; p < pairs; ++p) {
            auto& ca = state_.chains[static_cast<std::size_t>(2 * p)];
            auto& cb = state_.chains[static_cast<std::size_t>(2 * p + 1)];
            for (std::size_t k = 0; k < nica; ++k) {
                isoenergetic_cluster_move(model_, ca.replicas[k], cb.replicas[k], ca.energies[k], cb.energies[k],
                                          ca.slot_rngs[k]);
            }
        }
        exchange_all(state_, exec_);
        ++sweeps_;
    }

    std::int64_t cold_minimum(std::size_t chain) const {
        const auto& e = state_.chains[chain].energies;
        return *std::min_element(e.begin(), e.begin() + params_.n_ica);
    }

    void record(std::int64_t& target, bool& shifted) {
        for (const auto& ch : state_.chains) {
            const std::int64_t e = ch.energies[0];
            if (e < target) {
                target = e;
                hits_.clear();
                shifted = true;
            }
            if (e == target) ++hits_[SpinConfig::from_spins(ch.replicas[0])];
        }
    }

    bool floor_met() const {
        if (hits_.empty()) return false;
        for (const auto& [cfg, h] : hits_) {
            if (h < static_cast<std::uint64_t>(params_.min_hits)) return false;
        }
        return true;
    }

    std::uint64_t sweeps() const { return sweeps_; }
    std::size_t chains() const { return state_.chains.size(); }
    const std::unordered_map<SpinConfig, std::uint64_t>& hits() const { return hits_; }

private:
    BaseModel model_;
    PTParams params_;
    Exec exec_;
    PTState<std::int64_t> state_;
    std::uint64_t sweeps_ = 0;
    std::unordered_map<SpinConfig, std::uint64_t> hits_;
};

} // namespace

IcaResult ica_enumerate(const Instance& instance, const PTParams& params, Exec exec) {
    params.validate();
    IcaRun run(instance, params, exec);
    const std::uint64_t n_sw = params.sweeps();
    const std::uint64_t half = n_sw / 2;

    IcaResult result;
    result.ground_states.exact = false;
    result.chain_minima.assign(run.chains(), std::numeric_limits<std::int64_t>::max());
    for (std::uint64_t s = 0; s < half; ++s) {
        run.sweep();
        for (std::size_t c = 0; c < run.chains(); ++c) {
            result.chain_minima[c] = std::min(result.chain_minima[c], run.cold_minimum(c));
        }
    }
    std::int64_t target = *std::min_element(result.chain_minima.begin(), result.chain_minima.end());
    const bool agree = std::all_of(result.chain_minima.begin(), result.chain_minima.end(),
                                   [&](std::int64_t m) { return m == target; });
    if (!agree) {
        result.status = IcaStatus::Unconverged;
        result.ground_states.min_energy = target;
        result.sweeps = run.sweeps();
        return result;
    }

    const auto every = static_cast<std::uint64_t>(params.record_every);
    auto record_until = [&](std::uint64_t end) {
        while (run.sweeps() < end) {
            run.sweep();
            if (run.sweeps() % every == 0) run.record(target, result.minimum_shifted);
        }
    };
    record_until(n_sw);
    std::uint64_t total = n_sw;
    while (!run.floor_met() && total < 4 * n_sw) {
        total *= 2;
        record_until(total);
    }
    result.status = run.floor_met() ? IcaStatus::Converged : IcaStatus::HitFloorUnmet;

    std::vector<std::pair<SpinConfig, std::uint64_t>> sorted(run.hits().begin(), run.hits().end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    auto& gs = result.ground_states;
    gs.min_energy = target;
    gs.count = sorted.size();
    for (auto& [cfg, h] : sorted) {
        gs.configs.push_back(cfg);
        result.hits.push_back(h);
    }
    result.sweeps = run.sweeps();
    return result;
}

} // namespace fairsample
