#include "fairsample/generator.hpp"

#include <cstdlib>
#include <deque>

#include "fairsample/oracle.hpp"
#include "fairsample/samplers.hpp"

namespace fairsample {

Instance draw_couplings(const ChimeraGraph& graph, Rng& rng) {
    Instance out;
    out.graph = graph;
    out.couplings.resize(static_cast<std::size_t>(graph.num_couplers()));
    std::uniform_int_distribution<std::size_t> pick(0, kSidonCouplings.size() - 1);
    for (int& j : out.couplings) j = kSidonCouplings[pick(rng)];
    return out;
}

bool admits_zero_field(std::span<const int> magnitudes) {
    const std::size_t d = magnitudes.size();
    if (d == 0) return true;
    // sigma_0 = +1 without loss of generality (the negated pattern sums to minus).
    const std::uint32_t patterns = 1U << (d - 1);
    for (std::uint32_t mask = 0; mask < patterns; ++mask) {
        int sum = magnitudes[0];
        for (std::size_t j = 1; j < d; ++j) {
            sum += ((mask >> (j - 1)) & 1U) ? -magnitudes[j] : magnitudes[j];
        }
        if (sum == 0) return true;
    }
    return false;
}

namespace {

bool qubit_is_free(const Instance& inst, int qubit, std::vector<int>& scratch) {
    scratch.clear();
    for (int nb : inst.graph.neighbors(qubit)) {
        const int e = inst.graph.coupler_index(Coupler(qubit, nb));
        scratch.push_back(std::abs(inst.couplings[static_cast<std::size_t>(e)]));
    }
    return admits_zero_field(scratch);
}

} // namespace

std::vector<int> free_spin_audit(const Instance& instance) {
    std::vector<int> failing;
    std::vector<int> scratch;
    for (int q : instance.graph.active_qubits()) {
        if (qubit_is_free(instance, q, scratch)) failing.push_back(q);
    }
    return failing;
}

FreeSpinRepair eliminate_free_spins(Instance instance, Rng& rng, int per_qubit_budget) {
    FreeSpinRepair result;
    const ChimeraGraph& g = instance.graph;
    std::vector<int> attempts(static_cast<std::size_t>(g.num_sites()), 0);
    std::vector<std::uint8_t> queued(static_cast<std::size_t>(g.num_sites()), 0);
    std::vector<int> scratch;
    std::uniform_int_distribution<int> magnitude(5, 7);

    std::deque<int> work;
    for (int q : free_spin_audit(instance)) {
        work.push_back(q);
        queued[static_cast<std::size_t>(q)] = 1;
    }

    while (!work.empty()) {
        const int q = work.front();
        work.pop_front();
        queued[static_cast<std::size_t>(q)] = 0;
        if (!qubit_is_free(instance, q, scratch)) continue;

        if (++attempts[static_cast<std::size_t>(q)] > per_qubit_budget) {
            result.failed_qubit = q;
            return result;
        }
        ++result.repairs;
        const auto nbs = g.neighbors(q);
        if (nbs.empty()) {
            result.failed_qubit = q;  // isolated qubit: nothing to reshuffle
            return result;
        }
        std::uniform_int_distribution<std::size_t> pick(0, nbs.size() - 1);
        const auto e = static_cast<std::size_t>(g.coupler_index(Coupler(q, nbs[pick(rng)])));
        const int sign = instance.couplings[e] < 0 ? -1 : 1;
        instance.couplings[e] = sign * magnitude(rng);

        // q first so it is rechecked before its neighbors.
        if (!queued[static_cast<std::size_t>(q)]) {
            work.push_front(q);
            queued[static_cast<std::size_t>(q)] = 1;
        }
        for (int nb : g.neighbors(q)) {
            if (!queued[static_cast<std::size_t>(nb)]) {
                work.push_back(nb);
                queued[static_cast<std::size_t>(nb)] = 1;
            }
        }
    }
    result.instance = std::move(instance);
    return result;
}

std::optional<int> degeneracy_exponent(std::uint64_t n_gs) {
    if (n_gs == 0 || n_gs % 3 != 0) return std::nullopt;
    std::uint64_t m = n_gs / 3;
    if ((m & (m - 1)) != 0) return std::nullopt;
    int k = 0;
    while (m > 1) {
        m >>= 1;
        ++k;
    }
    if (k < 1) return std::nullopt;
    return k;
}

DegeneracyVerdict filter_degeneracy(std::uint64_t n_gs, CountProvenance provenance) {
    DegeneracyVerdict v;
    v.n_gs = n_gs;
    v.provenance = provenance;
    if (provenance == CountProvenance::Uncounted) {
        v.status = DegeneracyVerdict::Status::Uncounted;
        return v;
    }
    if (auto k = degeneracy_exponent(n_gs)) {
        v.status = DegeneracyVerdict::Status::Accepted;
        v.k = *k;
    } else {
        v.status = DegeneracyVerdict::Status::Rejected;
    }
    return v;
}

namespace {

bool exact_reach(const ChimeraGraph& g) {
    return g.cells() <= kFrontierMaxCells || g.num_active() <= kBruteForceMaxSites;
}

} // namespace

GenerationResult generate_instance(const ChimeraGraph& graph, std::uint64_t seed, const GenerationOptions& options) {
    GenerationResult out;
    const bool exact = exact_reach(graph);
    while (out.attempts < options.max_attempts) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(out.attempts));
        ++out.attempts;
        FreeSpinRepair rep = eliminate_free_spins(draw_couplings(graph, rng), rng, options.repair_budget);
        if (!rep.instance) {
            ++out.restarts;
            continue;
        }
        Instance inst = std::move(*rep.instance);
        inst.seed = seed;
        std::uint64_t n_gs = 0;
        std::int64_t e0 = 0;
        if (exact) {
            if (graph.cells() <= kFrontierMaxCells) {
                const GroundStateCount cnt = frontier_count(inst);
                n_gs = cnt.saturated ? 0 : cnt.count;
                e0 = cnt.min_energy;
            } else {
                const GroundStateSet gs = brute_force_enumerate(inst);
                n_gs = gs.count;
                e0 = gs.min_energy;
            }
        } else {
            PTParams p;
            p.b = options.heuristic_b;
            p.seed = mix_seed(seed, 0xC0DEULL + static_cast<std::uint64_t>(out.attempts));
            const IcaResult r = ica_enumerate(inst, p);
            n_gs = r.status == IcaStatus::Unconverged ? 0 : r.ground_states.count;
            e0 = r.ground_states.min_energy;
        }
        DegeneracyVerdict v = filter_degeneracy(n_gs, exact ? CountProvenance::Exact : CountProvenance::Heuristic);
        if (!v.accepted() || v.k > options.k_max) {
            ++out.rejections;
            continue;
        }
        out.instance = std::move(inst);
        out.verdict = v;
        out.min_energy = e0;
        out.repairs = rep.repairs;
        return out;
    }
    return out;
}

} // namespace fairsample
