#include "fairsample/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <exception>
#include <map>
#include <tuple>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "fairsample/hash.hpp"

namespace fairsample::pipeline {

using nlohmann::json;

namespace {

fs::path resolve_output(const fs::path& out, const std::string& default_name) {
    if (out.empty()) return default_name;
    if (fs::is_directory(out)) return out / default_name;
    return out;
}

bool starts_with(std::string_view text, std::string_view prefix) { return text.substr(0, prefix.size()) == prefix; }

std::string ica_params_text(const PTParams& p) {
    return fmt::format("ica;b={};n_temps={};t_min={};t_max={};n_ica={};replica_sets={};min_hits={};record_every={};"
                       "scaled={}",
                       p.b, p.n_temps, p.t_min, p.t_max, p.n_ica, p.replica_sets, p.min_hits, p.record_every,
                       p.scale_by_max_coupling ? 1 : 0);
}

/// Leading 64 bits of a hex hash; stable per-instance stream index.
std::uint64_t hash_stream(std::string_view hash) {
    std::uint64_t v = 0;
    std::from_chars(hash.data(), hash.data() + std::min<std::size_t>(16, hash.size()), v, 16);
    return v;
}

std::vector<fs::path> expand_records(const std::vector<fs::path>& inputs) {
    std::vector<fs::path> out;
    for (const fs::path& p : inputs) {
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& entry : fs::directory_iterator(p)) {
                if (entry.is_regular_file() && entry.path().extension() == ".jsonl") found.push_back(entry.path());
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.push_back(p);
        }
    }
    return out;
}

std::string sanitize(std::string s) {
    for (char& ch : s) {
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_' && ch != '.') ch = '_';
    }
    return s;
}

struct LoadedStates {
    io::GroundStateFile file;
    int n_sites = 0;
};

using StateIndex = std::map<std::string, LoadedStates>;

StateIndex load_ground_states(const std::vector<fs::path>& paths) {
    StateIndex index;
    for (const fs::path& p : paths) {
        const std::string text = io::read_file(p);
        LoadedStates s;
        s.file = io::parse_ground_states(text, p.string());
        s.n_sites = s.file.set.configs.empty() ? 0 : static_cast<int>(s.file.set.configs.front().size());
        index[s.file.instance_hash] = std::move(s);
    }
    return index;
}

/// Builds one report per (instance, sampler label, params, noise) group.
std::vector<FairnessReport> analyze_records(const std::vector<fs::path>& inputs, const StateIndex& states,
                                            const AnalyzeRequest& req) {
    using Key = std::tuple<std::string, std::string, std::string, std::string>;
    std::map<Key, std::vector<SampleRecord>> groups;
    std::map<Key, std::string> labels;
    for (const fs::path& p : expand_records(inputs)) {
        io::RecordsFile rf = io::parse_records(io::read_file(p), p.string());
        const io::RecordsHeader& h = rf.header;
        if (!states.contains(h.instance_hash)) {
            throw IntegrityError(fmt::format("{}: records reference instance {} but no ground-state file matches",
                                             p.string(), h.instance_hash));
        }
        const Key key{h.instance_hash, h.sampler, h.params_hash, h.noisy_hash};
        std::string label = h.sampler;
        if (h.sampler != "ica" && !rf.records.empty()) label += fmt::format("@{}", rf.records.front().sweeps);
        if (!h.noisy_hash.empty()) label += "+noise";
        labels[key] = label;
        auto& bucket = groups[key];
        bucket.insert(bucket.end(), std::make_move_iterator(rf.records.begin()),
                      std::make_move_iterator(rf.records.end()));
    }
    std::vector<FairnessReport> reports;
    for (const auto& [key, records] : groups) {
        const LoadedStates& s = states.at(std::get<0>(key));
        if (s.file.set.status != EnumerationStatus::Complete) {
            throw std::runtime_error("ground-state file for " + std::get<0>(key) + " lists no configurations (overflow)");
        }
        const std::string id = io::instance_id(std::get<0>(key));
        HitHistogram hist = tally(records, s.file.set, id, labels.at(key));
        FairnessOptions opt;
        opt.resamples = req.bootstrap;
        opt.baseline_trials = req.baseline_trials;
        opt.seed = mix_seed(req.seed, hash_stream(std::get<0>(key)));
        reports.push_back(analyze(hist, s.n_sites, opt));
    }
    std::sort(reports.begin(), reports.end(), [](const FairnessReport& a, const FairnessReport& b) {
        return std::tie(a.instance_id, a.sampler) < std::tie(b.instance_id, b.sampler);
    });
    return reports;
}

} // namespace

std::uint64_t parse_sweep_budget(const std::string& text) {
    if (text == "t20") return kBudgetT20;
    if (text == "t200") return kBudgetT200;
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || v == 0) {
        throw UsageError("sweep budget must be t20, t200 or a positive integer, got '" + text + "'");
    }
    return v;
}

// ---------------------------------------------------------------------------

GenSummary cmd_gen(const GenRequest& req) {
    if (req.c < 1) throw UsageError("--c must be positive");
    if (req.count < 1) throw UsageError("--count must be positive");
    if (req.options.max_attempts < 1) throw UsageError("--max-attempts must be positive");
    const ChimeraGraph graph = build_chimera(req.c, req.defects);

    std::vector<GenerationResult> results(static_cast<std::size_t>(req.count));
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < req.count; ++i) {
        try {
            results[static_cast<std::size_t>(i)] =
                generate_instance(graph, mix_seed(req.seed, static_cast<std::uint64_t>(i)), req.options);
        } catch (...) {
#pragma omp critical(gen_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    GenSummary summary;
    summary.requested = req.count;
    fs::create_directories(req.out);
    json entries = json::array();
    for (int i = 0; i < req.count; ++i) {
        const GenerationResult& r = results[static_cast<std::size_t>(i)];
        summary.attempts += r.attempts;
        summary.restarts += r.restarts;
        summary.rejections += r.rejections;
        if (!r.instance) {
            ++summary.failed_slots;
            continue;
        }
        io::InstanceFile file{*r.instance, r.verdict.n_gs, r.verdict.k, r.verdict.provenance};
        const std::string text = io::format_instance(file);
        GeneratedEntry e;
        e.file = req.out / fmt::format("c{}_{:04d}.inst", req.c, i);
        e.hash = sha256_hex(text);
        e.seed = r.instance->seed;
        e.verdict = r.verdict;
        e.min_energy = r.min_energy;
        e.attempts = r.attempts;
        io::write_file_atomic(e.file, text);
        entries.push_back({{"file", e.file.filename().string()},
                           {"sha256", e.hash},
                           {"seed", e.seed},
                           {"n_gs", e.verdict.n_gs},
                           {"k", e.verdict.k},
                           {"count", io::to_string(e.verdict.provenance)},
                           {"min_energy", e.min_energy},
                           {"attempts", e.attempts}});
        summary.accepted.push_back(std::move(e));
    }
    const json manifest = {{"command", "gen"},
                           {"c", req.c},
                           {"count", req.count},
                           {"seed", req.seed},
                           {"options",
                            {{"max_attempts", req.options.max_attempts},
                             {"k_max", req.options.k_max},
                             {"repair_budget", req.options.repair_budget},
                             {"heuristic_b", req.options.heuristic_b}}},
                           {"stats",
                            {{"accepted", summary.accepted.size()},
                             {"attempts", summary.attempts},
                             {"restarts", summary.restarts},
                             {"rejections", summary.rejections},
                             {"failed_slots", summary.failed_slots}}},
                           {"instances", entries}};
    summary.manifest = req.out / "gen_manifest.json";
    io::write_file_atomic(summary.manifest, manifest.dump(2) + "\n");
    return summary;
}

// ---------------------------------------------------------------------------

CountResult cmd_count(const CountRequest& req) {
    const std::string text = io::read_file(req.instance);
    const io::InstanceFile inst = io::parse_instance(text, req.instance.string());
    CountResult out;
    io::GroundStateFile& gs = out.ground_states;
    gs.instance_hash = sha256_hex(text);
    if (inst.instance.graph.cells() <= kFrontierMaxCells) {
        gs.set = frontier_enumerate(inst.instance, req.cap);
        gs.method = "frontier";
    } else {
        try {
            gs.set = brute_force_enumerate(inst.instance, Exec::Parallel, req.cap);
            gs.method = "brute_force";
        } catch (const OracleInfeasible&) {
            const IcaResult r = ica_enumerate(inst.instance, req.ica);
            gs.set = r.ground_states;
            gs.method = "ica";
            gs.ica_status = r.status;
        }
    }
    out.file = resolve_output(req.out, req.instance.stem().string() + ".gs");
    io::write_file_atomic(out.file, io::format_ground_states(gs));
    return out;
}

// ---------------------------------------------------------------------------

SampleSummary cmd_sample(const SampleRequest& req) {
    if (req.sampler != "sa" && req.sampler != "sqa" && req.sampler != "ica") {
        throw UsageError("unknown sampler '" + req.sampler + "' (expected sa, sqa or ica)");
    }
    if (req.sampler != "ica" && (req.gauges < 1 || req.reads < 1)) {
        throw UsageError("--gauges and --reads must be positive");
    }
    const std::string text = io::read_file(req.input);
    const bool noisy = starts_with(text, "fairsample-noisy");
    if (noisy && req.sampler == "ica") throw UsageError("ica samples integer base instances only");

    io::RecordsFile rf;
    io::RecordsHeader& h = rf.header;
    h.sampler = req.sampler;
    h.seed = req.seed;
    std::optional<io::NoisyFile> nf;
    std::optional<io::InstanceFile> inst;
    if (noisy) {
        nf = io::parse_noisy(text, req.input.string());
        h.instance_hash = nf->base_hash;
        h.noisy_hash = sha256_hex(text);
    } else {
        inst = io::parse_instance(text, req.input.string());
        h.instance_hash = sha256_hex(text);
    }

    SampleSummary summary;
    if (req.sampler == "ica") {
        PTParams p = req.ica;
        p.seed = req.seed;
        const IcaResult r = ica_enumerate(inst->instance, p);
        h.params = ica_params_text(p);
        h.params_hash = sha256_hex(h.params);
        h.ica_status = r.status;
        h.ica_sweeps = r.sweeps;
        summary.ica_status = r.status;
        if (r.status != IcaStatus::Unconverged) {
            for (std::size_t i = 0; i < r.ground_states.configs.size(); ++i) {
                for (std::uint64_t k = 0; k < r.hits[i]; ++k) {
                    rf.records.push_back({"ica", h.params_hash, 0, r.ground_states.configs[i],
                                          static_cast<double>(r.ground_states.min_energy), r.sweeps, req.seed});
                }
            }
        }
    } else {
        SamplerConfig cfg;
        cfg.sqa = req.sqa;
        if (req.sampler == "sa") {
            cfg.kind = SamplerKind::SimulatedAnnealing;
            cfg.sa = AnnealSchedule::geometric(req.sa_hot, req.sa_cold,
                                               static_cast<int>(req.sweep_budget.value_or(cfg.sa.sweeps())), 1);
        } else if (req.sweep_budget) {
            cfg.sqa.sweeps = static_cast<int>(*req.sweep_budget);
        }
        h.params = cfg.params_text();
        h.params_hash = cfg.params_hash();
        h.gauges = req.gauges;
        h.reads = req.reads;
        rf.records = noisy ? run_with_gauges(nf->noisy, cfg, req.gauges, req.reads, req.seed)
                           : run_with_gauges(inst->instance, cfg, req.gauges, req.reads, req.seed);
    }

    if (req.ground_states) {
        const io::GroundStateFile gs =
            io::parse_ground_states(io::read_file(*req.ground_states), req.ground_states->string());
        if (gs.instance_hash != h.instance_hash) {
            throw IntegrityError("ground-state file " + req.ground_states->string() + " belongs to instance " +
                                 gs.instance_hash + ", not " + h.instance_hash);
        }
        const std::unordered_set<SpinConfig> set(gs.set.configs.begin(), gs.set.configs.end());
        std::size_t hits = 0;
        for (const SampleRecord& r : rf.records) hits += set.contains(r.config) ? 1 : 0;
        summary.hit_fraction =
            rf.records.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(rf.records.size());
    }

    summary.records = rf.records.size();
    summary.file = resolve_output(req.out, req.input.stem().string() + "." + req.sampler + ".jsonl");
    io::write_file_atomic(summary.file, io::format_records(rf));
    return summary;
}

// ---------------------------------------------------------------------------

AnalyzeResult cmd_analyze(const AnalyzeRequest& req) {
    if (req.bootstrap < 1000) throw UsageError("--bootstrap must be at least 1000");
    if (req.baseline_trials < 1) throw UsageError("--baseline-trials must be positive");
    if (req.records.empty() && !req.compare) throw UsageError("no records given");
    if (req.ground_states.empty()) throw UsageError("no ground-state files given");
    const StateIndex states = load_ground_states(req.ground_states);

    AnalyzeResult result;
    if (!req.records.empty()) result.reports = analyze_records(req.records, states, req);
    if (req.compare) {
        const auto a = analyze_records({req.compare->first}, states, req);
        const auto b = analyze_records({req.compare->second}, states, req);
        result.comparison = compare_runs(min_solutions_filter(a, req.floor), min_solutions_filter(b, req.floor));
        io::write_file_atomic(req.out / "compare.tsv", io::format_comparison_tsv(*result.comparison));
        result.reports.insert(result.reports.end(), a.begin(), a.end());
        result.reports.insert(result.reports.end(), b.begin(), b.end());
    }
    io::write_file_atomic(req.out / "report.tsv", io::format_report_tsv(result.reports, req.floor));
    for (const FairnessReport& r : min_solutions_filter(result.reports, req.floor)) {
        io::write_file_atomic(req.out / "hist" / sanitize(r.instance_id + "_" + r.sampler + ".csv"),
                              io::format_histogram_csv(r));
    }
    return result;
}

// ---------------------------------------------------------------------------

fs::path cmd_noise(const NoiseRequest& req) {
    if (!(req.sigma_j >= 0.0) || !(req.sigma_h >= 0.0)) {
        throw UsageError("noise standard deviations must be non-negative");
    }
    const std::string text = io::read_file(req.instance);
    const io::InstanceFile inst = io::parse_instance(text, req.instance.string());
    Rng rng = make_rng(req.seed);
    NoisyInstance noisy = apply_noise(inst.instance, req.sigma_j, req.sigma_h, rng);
    noisy.seed = req.seed;
    const fs::path out = resolve_output(req.out, req.instance.stem().string() + ".noisy");
    io::write_file_atomic(out, io::format_noisy(noisy, sha256_hex(text)));
    return out;
}

} // namespace fairsample::pipeline
