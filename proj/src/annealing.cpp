#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fairsample/samplers.hpp"

namespace fairsample {

// Zero-cost flips are accepted with probability 1/2: always accepting them
// lets a sequential sweep cycle forever through zero-field states (e.g. a
// ferromagnetic cell with both halves balanced). Detailed balance holds for
// any symmetric acceptance at d = 0.
template <class T>
void metropolis_sweep(const IsingModel<T>& model, Spins& spins, T& energy, double beta, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = model.size();
    for (int i = 0; i < n; ++i) {
        const T d = model.delta(spins, i);
        if (d < T{0} || unit(rng) < (d == T{0} ? 0.5 : std::exp(-beta * static_cast<double>(d)))) {
            spins[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(-spins[static_cast<std::size_t>(i)]);
            energy += d;
        }
    }
}

template void metropolis_sweep(const BaseModel&, Spins&, std::int64_t&, double, Rng&);
template void metropolis_sweep(const NoisyModel&, Spins&, double&, double, Rng&);

namespace {

Spins random_spins(int n, Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    Spins s(static_cast<std::size_t>(n));
    for (auto& v : s) v = coin(rng) ? 1 : -1;
    return s;
}

} // namespace

AnnealSchedule AnnealSchedule::geometric(double hot, double cold, int steps, int sweeps_per_temperature) {
    if (steps < 1 || hot <= 0.0 || cold <= 0.0) throw std::invalid_argument("invalid geometric schedule");
    AnnealSchedule s;
    s.sweeps_per_temperature = sweeps_per_temperature;
    s.temperatures.resize(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k) {
        const double x = steps == 1 ? 1.0 : static_cast<double>(k) / (steps - 1);
        s.temperatures[static_cast<std::size_t>(k)] = hot * std::pow(cold / hot, x);
    }
    return s;
}

void AnnealSchedule::validate() const {
    if (temperatures.empty()) throw std::invalid_argument("annealing schedule is empty");
    if (sweeps_per_temperature < 1) throw std::invalid_argument("sweeps per temperature must be positive");
    for (std::size_t k = 0; k < temperatures.size(); ++k) {
        if (!(temperatures[k] > 0.0)) throw std::invalid_argument("annealing temperatures must be positive");
        if (k > 0 && !(temperatures[k] < temperatures[k - 1])) {
            throw std::invalid_argument("annealing schedule must be strictly decreasing");
        }
    }
}

template <class T>
AnnealResult simulated_annealing(const IsingModel<T>& model, const AnnealSchedule& schedule, Rng& rng) {
    schedule.validate();
    Spins spins = random_spins(model.size(), rng);
    T e = model.energy(spins);
    Spins best = spins;
    T best_e = e;
    for (double t : schedule.temperatures) {
        const double beta = 1.0 / t;
        for (int s = 0; s < schedule.sweeps_per_temperature; ++s) {
            metropolis_sweep(model, spins, e, beta, rng);
            if (e < best_e) {
                best_e = e;
                best = spins;
            }
        }
    }
    return {SpinConfig::from_spins(best), static_cast<double>(best_e)};
}

template AnnealResult simulated_annealing(const BaseModel&, const AnnealSchedule&, Rng&);
template AnnealResult simulated_annealing(const NoisyModel&, const AnnealSchedule&, Rng&);

void SqaParams::validate() const {
    if (trotter_slices < 1) throw std::invalid_argument("trotter_slices must be positive");
    if (sweeps < 1) throw std::invalid_argument("sqa sweeps must be positive");
    if (!(temperature > 0.0)) throw std::invalid_argument("sqa temperature must be positive");
    if (gamma_schedule.size() < 2) throw std::invalid_argument("gamma schedule needs at least two values");
    for (std::size_t k = 0; k < gamma_schedule.size(); ++k) {
        if (!(gamma_schedule[k] > 0.0)) throw std::invalid_argument("gamma values must be positive");
        if (k > 0 && gamma_schedule[k] > gamma_schedule[k - 1]) {
            throw std::invalid_argument("gamma schedule must be non-increasing");
        }
    }
    if (gamma_schedule.back() > 1e-2 * gamma_schedule.front()) {
        throw std::invalid_argument("final gamma must be at most 1e-2 of the initial gamma");
    }
}

double SqaParams::gamma_at(int sweep) const {
    const auto segments = static_cast<double>(gamma_schedule.size() - 1);
    const double x = sweeps == 1 ? 1.0 : static_cast<double>(sweep) / (sweeps - 1) * segments;
    const auto k = std::min(static_cast<std::size_t>(x), gamma_schedule.size() - 2);
    const double f = x - static_cast<double>(k);
    return gamma_schedule[k] + f * (gamma_schedule[k + 1] - gamma_schedule[k]);
}

double SqaParams::slice_coupling(double gamma, int slices, double temperature) {
    return -0.5 * temperature * std::log(std::tanh(gamma / (slices * temperature)));
}

template <class T>
AnnealResult sqa_sample(const IsingModel<T>& model, const SqaParams& params, Rng& rng) {
    params.validate();
    const int n = model.size();
    const int p = params.trotter_slices;
    const double inv_p = 1.0 / p;
    double scale = params.scale_by_max_coupling ? static_cast<double>(model.max_coupling()) : 1.0;
    if (!(scale > 0.0)) scale = 1.0;
    const double temperature = params.temperature * scale;
    const double inv_t = 1.0 / temperature;
    std::vector<Spins> slices;
    slices.reserve(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k) slices.push_back(random_spins(n, rng));

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int sweep = 0; sweep < params.sweeps; ++sweep) {
        const double jp =
            p > 1 ? SqaParams::slice_coupling(params.gamma_at(sweep) * scale, p, temperature) : 0.0;
        for (int k = 0; k < p; ++k) {
            Spins& cur = slices[static_cast<std::size_t>(k)];
            const Spins& prev = slices[static_cast<std::size_t>((k + p - 1) % p)];
            const Spins& next = slices[static_cast<std::size_t>((k + 1) % p)];
            for (int i = 0; i < n; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                double d = static_cast<double>(model.delta(cur, i)) * inv_p;
                if (p > 1) d += 2.0 * jp * cur[ui] * (prev[ui] + next[ui]);
                if (d < 0.0 || unit(rng) < (d == 0.0 ? 0.5 : std::exp(-d * inv_t))) {
                    cur[ui] = static_cast<std::int8_t>(-cur[ui]);
                }
            }
        }
    }

    std::size_t best = 0;
    T best_e = model.energy(slices[0]);
    for (std::size_t k = 1; k < slices.size(); ++k) {
        const T e = model.energy(slices[k]);
        if (e < best_e) {
            best_e = e;
            best = k;
        }
    }
    return {SpinConfig::from_spins(slices[best]), static_cast<double>(best_e)};
}

template AnnealResult sqa_sample(const BaseModel&, const SqaParams&, Rng&);
template AnnealResult sqa_sample(const NoisyModel&, const SqaParams&, Rng&);

} // namespace fairsample
