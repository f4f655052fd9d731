#include <sstream>
#include <stdexcept>

#include "fairsample/hash.hpp"
#include "fairsample/samplers.hpp"

namespace fairsample {

std::string SamplerConfig::id() const {
    return kind == SamplerKind::SimulatedAnnealing ? "sa" : "sqa";
}

std::string SamplerConfig::params_text() const {
    std::ostringstream out;
    out.precision(17);
    out << id();
    if (kind == SamplerKind::SimulatedAnnealing) {
        out << ";sweeps_per_temperature=" << sa.sweeps_per_temperature << ";temperatures=";
        for (double t : sa.temperatures) out << t << ',';
    } else {
        out << ";slices=" << sqa.trotter_slices << ";sweeps=" << sqa.sweeps << ";temperature=" << sqa.temperature
            << ";gamma=";
        for (double g : sqa.gamma_schedule) out << g << ",";
        out << ";scaled=" << (sqa.scale_by_max_coupling ? 1 : 0);
    }
    return out.str();
}

std::string SamplerConfig::params_hash() const { return sha256_hex(params_text()); }

std::uint64_t SamplerConfig::sweep_budget() const {
    return kind == SamplerKind::SimulatedAnnealing ? sa.sweeps() : static_cast<std::uint64_t>(sqa.sweeps);
}

namespace {

template <class Inst>
std::vector<SampleRecord> run_gauged(const Inst& instance, const SamplerConfig& sampler,
                                     std::span<const GaugeVector> gauges, int reads, std::uint64_t seed, Exec exec) {
    if (reads < 1) throw std::invalid_argument("reads per gauge must be positive");
    if (gauges.empty()) throw std::invalid_argument("at least one gauge is required");
    if (sampler.kind == SamplerKind::SimulatedAnnealing) sampler.sa.validate();
    else sampler.sqa.validate();

    using Model = std::conditional_t<std::is_same_v<Inst, Instance>, BaseModel, NoisyModel>;
    std::vector<Model> models;
    models.reserve(gauges.size());
    for (const auto& g : gauges) models.emplace_back(apply_gauge(instance, g));

    const std::string id = sampler.id();
    const std::string hash = sampler.params_hash();
    const std::uint64_t budget = sampler.sweep_budget();
    const long total = static_cast<long>(gauges.size()) * reads;
    std::vector<SampleRecord> out(static_cast<std::size_t>(total));
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
    for (long w = 0; w < total; ++w) {
        const auto g = static_cast<std::size_t>(w / reads);
        const std::uint64_t read_seed = mix_seed(seed, static_cast<std::uint64_t>(w));
        Rng rng(read_seed);
        const AnnealResult r = sampler.kind == SamplerKind::SimulatedAnnealing
                                   ? simulated_annealing(models[g], sampler.sa, rng)
                                   : sqa_sample(models[g], sampler.sqa, rng);
        SampleRecord& rec = out[static_cast<std::size_t>(w)];
        rec.sampler = id;
        rec.params_hash = hash;
        rec.gauge = static_cast<int>(g);
        rec.config = ungauge_config(r.config, gauges[g]);
        rec.energy = static_cast<double>(energy(instance, rec.config));
        rec.sweeps = budget;
        rec.seed = read_seed;
    }
    return out;
}

} // namespace

std::vector<SampleRecord> run_with_gauges(const Instance& instance, const SamplerConfig& sampler,
                                          std::span<const GaugeVector> gauges, int reads, std::uint64_t seed,
                                          Exec exec) {
    return run_gauged(instance, sampler, gauges, reads, seed, exec);
}

std::vector<SampleRecord> run_with_gauges(const NoisyInstance& instance, const SamplerConfig& sampler,
                                          std::span<const GaugeVector> gauges, int reads, std::uint64_t seed,
                                          Exec exec) {
    return run_gauged(instance, sampler, gauges, reads, seed, exec);
}

std::vector<GaugeVector> draw_gauges(const ChimeraGraph& graph, int gauges, std::uint64_t seed) {
    if (gauges < 1) throw std::invalid_argument("gauge count must be positive");
    // Stream index past any read index so gauges and reads never share a stream.
    Rng rng = make_rng(seed, ~std::uint64_t{0});
    std::vector<GaugeVector> out;
    for (int g = 0; g < gauges; ++g) out.push_back(random_gauge(graph, rng));
    return out;
}

std::vector<SampleRecord> run_with_gauges(const Instance& instance, const SamplerConfig& sampler, int gauges,
                                          int reads, std::uint64_t seed, Exec exec) {
    const auto g = draw_gauges(instance.graph, gauges, seed);
    return run_with_gauges(instance, sampler, std::span<const GaugeVector>(g), reads, seed, exec);
}

std::vector<SampleRecord> run_with_gauges(const NoisyInstance& instance, const SamplerConfig& sampler, int gauges,
                                          int reads, std::uint64_t seed, Exec exec) {
    const auto g = draw_gauges(instance.graph(), gauges, seed);
    return run_with_gauges(instance, sampler, std::span<const GaugeVector>(g), reads, seed, exec);
}

} // namespace fairsample
