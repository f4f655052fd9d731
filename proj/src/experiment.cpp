#include <algorithm>
#include <exception>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "fairsample/hash.hpp"
#include "fairsample/pipeline.hpp"

namespace fairsample::pipeline {

using nlohmann::json;

namespace {

// Stream tags for the per-stage seeds.
constexpr std::uint64_t kGenStream = 0x100;
constexpr std::uint64_t kCountStream = 0x200;
constexpr std::uint64_t kSampleStream = 0x300;
constexpr std::uint64_t kAnalyzeStream = 0x400;
constexpr std::uint64_t kNoiseStream = 0x500;

bool is_sampler(const std::string& s) { return s == "sa" || s == "sqa" || s == "ica"; }

json pt_to_json(const PTParams& p) {
    return {{"b", p.b},
            {"n_temps", p.n_temps},
            {"t_min", p.t_min},
            {"t_max", p.t_max},
            {"n_ica", p.n_ica},
            {"replica_sets", p.replica_sets},
            {"min_hits", p.min_hits},
            {"record_every", p.record_every},
            {"scale_by_max_coupling", p.scale_by_max_coupling}};
}

PTParams pt_from_json(const json& j, PTParams p) {
    p.b = j.value("b", p.b);
    p.n_temps = j.value("n_temps", p.n_temps);
    p.t_min = j.value("t_min", p.t_min);
    p.t_max = j.value("t_max", p.t_max);
    p.n_ica = j.value("n_ica", p.n_ica);
    p.replica_sets = j.value("replica_sets", p.replica_sets);
    p.min_hits = j.value("min_hits", p.min_hits);
    p.record_every = j.value("record_every", p.record_every);
    p.scale_by_max_coupling = j.value("scale_by_max_coupling", p.scale_by_max_coupling);
    return p;
}

/// Runs body(i) for i in [0, n) across OpenMP threads, rethrowing the first
/// exception on the calling thread.
template <class F>
void parallel_for(int n, F&& body) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
#pragma omp critical(experiment_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

} // namespace

std::vector<NoisePoint> relative_noise_grid(double j_min) {
    const double levels[] = {0.0, 0.05 * j_min, 0.1 * j_min};
    std::vector<NoisePoint> grid;
    for (double sj : levels) {
        for (double sh : levels) grid.push_back({sj, sh});
    }
    return grid;
}

int production_instances(int n_sites) {
    switch (n_sites) {
        case 512: return 4164;
        case 648: return 6970;
        case 800: return 11199;
        case 968: return 16739;
        default: throw std::invalid_argument("no production instance count for N = " + std::to_string(n_sites));
    }
}

void ExperimentManifest::validate() const {
    if (sizes.empty()) throw UsageError("manifest lists no sizes");
    if (sizes.size() != instances_per_size.size()) {
        throw UsageError("instances_per_size must have one entry per size");
    }
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 1) throw UsageError("sizes must be positive");
        if (instances_per_size[i] < 1) throw UsageError("instances_per_size must be positive");
    }
    if (samplers.empty()) throw UsageError("manifest lists no samplers");
    for (const auto& s : samplers) {
        if (!is_sampler(s)) throw UsageError("unknown sampler '" + s + "' in manifest");
    }
    const bool annealers = std::any_of(samplers.begin(), samplers.end(), [](const auto& s) { return s != "ica"; });
    if ((annealers || !noise_grid.empty()) && sweep_budgets.empty()) throw UsageError("manifest lists no sweep budgets");
    for (auto b : sweep_budgets) {
        if (b == 0 || b > (1U << 30)) throw UsageError("sweep budgets must lie in [1, 2^30]");
    }
    if (gauges < 1 || reads < 1) throw UsageError("gauges and reads must be positive");
    for (const NoisePoint& p : noise_grid) {
        if (!(p.sigma_j >= 0.0) || !(p.sigma_h >= 0.0)) throw UsageError("noise levels must be non-negative");
    }
    if (bootstrap < 1000) throw UsageError("bootstrap must be at least 1000");
    if (baseline_trials < 1) throw UsageError("baseline_trials must be positive");
    if (!(sa_hot > sa_cold) || !(sa_cold > 0.0)) throw UsageError("SA schedule needs hot > cold > 0");
    try {
        sqa.validate();
        ica.validate();
    } catch (const std::invalid_argument& ex) {
        throw UsageError(ex.what());
    }
}

std::string ExperimentManifest::to_json() const {
    json grid = json::array();
    for (const NoisePoint& p : noise_grid) grid.push_back({p.sigma_j, p.sigma_h});
    const json j = {{"version", io::kFormatVersion},
                    {"sizes", sizes},
                    {"instances_per_size", instances_per_size},
                    {"samplers", samplers},
                    {"sweep_budgets", sweep_budgets},
                    {"gauges", gauges},
                    {"reads", reads},
                    {"sa", {{"hot", sa_hot}, {"cold", sa_cold}}},
                    {"sqa",
                     {{"trotter_slices", sqa.trotter_slices},
                      {"temperature", sqa.temperature},
                      {"gamma_schedule", sqa.gamma_schedule},
                      {"scale_by_max_coupling", sqa.scale_by_max_coupling}}},
                    {"ica", pt_to_json(ica)},
                    {"noise_grid", grid},
                    {"seed", seed},
                    {"floor", floor},
                    {"bootstrap", bootstrap},
                    {"baseline_trials", baseline_trials},
                    {"generation",
                     {{"max_attempts", generation.max_attempts},
                      {"k_max", generation.k_max},
                      {"repair_budget", generation.repair_budget},
                      {"heuristic_b", generation.heuristic_b}}}};
    return j.dump(2) + "\n";
}

ExperimentManifest ExperimentManifest::from_json(const std::string& text) {
    ExperimentManifest m = desk();
    try {
        const json j = json::parse(text);
        if (j.value("version", io::kFormatVersion) != io::kFormatVersion) {
            throw UsageError("unsupported manifest version");
        }
        m.sizes = j.value("sizes", m.sizes);
        m.instances_per_size = j.value("instances_per_size", m.instances_per_size);
        m.samplers = j.value("samplers", m.samplers);
        m.sweep_budgets = j.value("sweep_budgets", m.sweep_budgets);
        m.gauges = j.value("gauges", m.gauges);
        m.reads = j.value("reads", m.reads);
        if (j.contains("sa")) {
            m.sa_hot = j["sa"].value("hot", m.sa_hot);
            m.sa_cold = j["sa"].value("cold", m.sa_cold);
        }
        if (j.contains("sqa")) {
            const json& s = j["sqa"];
            m.sqa.trotter_slices = s.value("trotter_slices", m.sqa.trotter_slices);
            m.sqa.temperature = s.value("temperature", m.sqa.temperature);
            m.sqa.gamma_schedule = s.value("gamma_schedule", m.sqa.gamma_schedule);
            m.sqa.scale_by_max_coupling = s.value("scale_by_max_coupling", m.sqa.scale_by_max_coupling);
        }
        if (j.contains("ica")) m.ica = pt_from_json(j["ica"], m.ica);
        if (j.contains("noise_grid")) {
            m.noise_grid.clear();
            for (const json& p : j["noise_grid"]) {
                if (!p.is_array() || p.size() != 2) throw UsageError("noise_grid entries are [sigma_j, sigma_h]");
                m.noise_grid.push_back({p[0].get<double>(), p[1].get<double>()});
            }
        }
        m.seed = j.value("seed", m.seed);
        m.floor = j.value("floor", m.floor);
        m.bootstrap = j.value("bootstrap", m.bootstrap);
        m.baseline_trials = j.value("baseline_trials", m.baseline_trials);
        if (j.contains("generation")) {
            const json& g = j["generation"];
            m.generation.max_attempts = g.value("max_attempts", m.generation.max_attempts);
            m.generation.k_max = g.value("k_max", m.generation.k_max);
            m.generation.repair_budget = g.value("repair_budget", m.generation.repair_budget);
            m.generation.heuristic_b = g.value("heuristic_b", m.generation.heuristic_b);
        }
    } catch (const json::exception& ex) {
        throw UsageError(std::string("bad manifest: ") + ex.what());
    }
    m.validate();
    return m;
}

ExperimentManifest ExperimentManifest::desk() {
    ExperimentManifest m;
    m.sizes = {2, 3};
    m.instances_per_size = {10, 5};
    m.samplers = {"ica", "sqa"};
    m.sweep_budgets = {kBudgetT20, kBudgetT200};
    m.gauges = 10;
    m.reads = 50;
    m.ica.b = 14;
    m.noise_grid = relative_noise_grid();
    return m;
}

ExperimentManifest ExperimentManifest::production() {
    ExperimentManifest m;
    m.sizes = {8, 9, 10, 11};
    m.instances_per_size.clear();
    for (int c : m.sizes) m.instances_per_size.push_back(production_instances(8 * c * c));
    m.samplers = {"ica", "sqa"};
    m.sweep_budgets = {kBudgetT20, kBudgetT200};
    m.gauges = 100;
    m.reads = 1000;
    m.ica = PTParams::table_row(512);
    m.noise_grid.clear();
    return m;
}

ExperimentResult run_experiment(const ExperimentManifest& m, const fs::path& out) {
    m.validate();
    fs::create_directories(out);
    ExperimentResult result;
    json seeds = json::object();

    // gen
    std::vector<GeneratedEntry> instances;
    json gen_seeds = json::array();
    for (std::size_t s = 0; s < m.sizes.size(); ++s) {
        GenRequest g;
        g.c = m.sizes[s];
        g.count = m.instances_per_size[s];
        g.seed = mix_seed(m.seed, kGenStream + static_cast<std::uint64_t>(g.c));
        g.out = out / "instances" / fmt::format("c{}", g.c);
        g.options = m.generation;
        GenSummary summary = cmd_gen(g);
        result.shortfall = result.shortfall || summary.failed_slots > 0;
        gen_seeds.push_back({{"c", g.c}, {"seed", g.seed}});
        instances.insert(instances.end(), summary.accepted.begin(), summary.accepted.end());
    }
    seeds["gen"] = gen_seeds;
    const int n = static_cast<int>(instances.size());

    // count
    const std::uint64_t count_seed = mix_seed(m.seed, kCountStream);
    seeds["count"] = count_seed;
    std::vector<fs::path> gs_files(instances.size());
    parallel_for(n, [&](int i) {
        CountRequest req;
        req.instance = instances[static_cast<std::size_t>(i)].file;
        req.out = out / "ground_states" / (req.instance.stem().string() + ".gs");
        req.ica = m.ica;
        req.ica.seed = mix_seed(count_seed, static_cast<std::uint64_t>(i));
        gs_files[static_cast<std::size_t>(i)] = cmd_count(req).file;
    });

    // sample
    struct Run {
        std::string label;
        std::string sampler;
        std::uint64_t budget = 0;
        std::optional<std::size_t> noise;
    };
    std::vector<Run> runs;
    for (const auto& s : m.samplers) {
        if (s == "ica") {
            runs.push_back({"ica", s, 0, std::nullopt});
        } else {
            for (auto b : m.sweep_budgets) runs.push_back({fmt::format("{}_b{}", s, b), s, b, std::nullopt});
        }
    }
    for (std::size_t k = 0; k < m.noise_grid.size(); ++k) {
        runs.push_back({fmt::format("sqa_b{}_noise{}", m.sweep_budgets.front(), k), "sqa", m.sweep_budgets.front(), k});
    }

    json run_seeds = json::array();
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const Run& run = runs[r];
        const std::uint64_t run_seed = mix_seed(m.seed, kSampleStream + r);
        json entry = {{"label", run.label}, {"sampler", run.sampler}, {"seed", run_seed}};
        std::uint64_t noise_seed = 0;
        if (run.noise) {
            noise_seed = mix_seed(m.seed, kNoiseStream + *run.noise);
            const NoisePoint& p = m.noise_grid[*run.noise];
            entry["noise"] = {{"sigma_j", p.sigma_j}, {"sigma_h", p.sigma_h}, {"seed", noise_seed}};
        }
        if (run.budget > 0) entry["sweep_budget"] = run.budget;
        run_seeds.push_back(entry);

        for (int i = 0; i < n; ++i) {
            const GeneratedEntry& inst = instances[static_cast<std::size_t>(i)];
            SampleRequest req;
            req.input = inst.file;
            if (run.noise) {
                NoiseRequest nr;
                nr.instance = inst.file;
                nr.sigma_j = m.noise_grid[*run.noise].sigma_j;
                nr.sigma_h = m.noise_grid[*run.noise].sigma_h;
                nr.seed = mix_seed(noise_seed, static_cast<std::uint64_t>(i));
                nr.out = out / "noisy" / fmt::format("noise{}", *run.noise) / (inst.file.stem().string() + ".noisy");
                req.input = cmd_noise(nr);
            }
            req.sampler = run.sampler;
            req.gauges = m.gauges;
            req.reads = m.reads;
            req.seed = mix_seed(run_seed, static_cast<std::uint64_t>(i));
            if (run.budget > 0) req.sweep_budget = run.budget;
            req.sa_hot = m.sa_hot;
            req.sa_cold = m.sa_cold;
            req.sqa = m.sqa;
            req.ica = m.ica;
            req.out = out / "records" / run.label / (inst.file.stem().string() + ".jsonl");
            cmd_sample(req);
        }
    }
    seeds["sample"] = run_seeds;

    // analyze
    const std::uint64_t analyze_seed = mix_seed(m.seed, kAnalyzeStream);
    seeds["analyze"] = analyze_seed;
    if (n > 0) {
        for (const Run& run : runs) {
            AnalyzeRequest req;
            req.records = {out / "records" / run.label};
            req.ground_states = gs_files;
            req.floor = m.floor;
            req.bootstrap = m.bootstrap;
            req.baseline_trials = m.baseline_trials;
            req.seed = analyze_seed;
            req.out = out / "analysis" / run.label;
            cmd_analyze(req);
        }
        for (const auto& s : m.samplers) {
            if (s == "ica" || m.sweep_budgets.size() < 2) continue;
            AnalyzeRequest req;
            req.compare = {out / "records" / fmt::format("{}_b{}", s, m.sweep_budgets.front()),
                           out / "records" / fmt::format("{}_b{}", s, m.sweep_budgets.back())};
            req.ground_states = gs_files;
            req.floor = m.floor;
            req.bootstrap = m.bootstrap;
            req.baseline_trials = m.baseline_trials;
            req.seed = analyze_seed;
            req.out = out / "analysis" / fmt::format("compare_{}", s);
            cmd_analyze(req);
        }
    }

    // Inventory every artifact with its hash.
    result.manifest = out / "experiment.json";
    for (const auto& entry : fs::recursive_directory_iterator(out)) {
        if (!entry.is_regular_file() || entry.path() == result.manifest) continue;
        if (entry.path().extension() == ".tmp") continue;
        result.artifacts.push_back(entry.path());
    }
    std::sort(result.artifacts.begin(), result.artifacts.end());
    json artifacts = json::array();
    for (const fs::path& p : result.artifacts) {
        artifacts.push_back({{"path", fs::relative(p, out).generic_string()}, {"sha256", io::file_hash(p)}});
    }
    const json doc = {{"manifest", json::parse(m.to_json())},
                      {"seeds", seeds},
                      {"instances", n},
                      {"shortfall", result.shortfall},
                      {"artifacts", artifacts}};
    io::write_file_atomic(result.manifest, doc.dump(2) + "\n");
    return result;
}

std::vector<std::string> verify_experiment(const fs::path& experiment_json) {
    const json doc = json::parse(io::read_file(experiment_json));
    const fs::path root = experiment_json.parent_path();
    std::vector<std::string> bad;
    for (const json& a : doc.at("artifacts")) {
        const std::string rel = a.at("path").get<std::string>();
        const fs::path p = root / rel;
        if (!fs::exists(p) || io::file_hash(p) != a.at("sha256").get<std::string>()) bad.push_back(rel);
    }
    return bad;
}

} // namespace fairsample::pipeline
