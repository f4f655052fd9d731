#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <omp.h>

#include "fairsample/pipeline.hpp"

namespace fairsample::pipeline {

namespace {

void print_gen(std::ostream& out, const GenSummary& s) {
    out << fmt::format("accepted {}/{}\nattempts {}\nrestarts {}\nrejections {}\nfailed_slots {}\nmanifest {}\n",
                       s.accepted.size(), s.requested, s.attempts, s.restarts, s.rejections, s.failed_slots,
                       s.manifest.string());
    for (const GeneratedEntry& e : s.accepted) {
        out << fmt::format("{} n_gs={} k={} count={}\n", e.file.string(), e.verdict.n_gs, e.verdict.k,
                           io::to_string(e.verdict.provenance));
    }
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ground-state sampling fairness on Chimera spin glasses"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 0;
    int workers = 0;
    std::string out_path;
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_option("--workers", workers, "OpenMP threads, 0 keeps the runtime default")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--out", out_path, "output directory, or output file for count/sample/noise");

    // gen
    GenRequest gen;
    std::vector<int> defect_qubits;
    auto* gen_cmd = app.add_subcommand("gen", "generate filtered instances");
    gen_cmd->add_option("--c", gen.c, "lattice size in unit cells")->capture_default_str();
    gen_cmd->add_option("--count", gen.count, "accepted instances to produce")->capture_default_str();
    gen_cmd->add_option("--max-attempts", gen.options.max_attempts, "draws per instance slot")->capture_default_str();
    gen_cmd->add_option("--k-max", gen.options.k_max, "largest accepted exponent k")->capture_default_str();
    gen_cmd->add_option("--heuristic-b", gen.options.heuristic_b, "ICA sweep exponent past the exact oracle")
        ->capture_default_str();
    gen_cmd->add_option("--defect-qubit", defect_qubits, "disabled qubit (repeatable)");

    // count
    CountRequest count;
    count.ica.b = 14;
    std::string count_input;
    auto* count_cmd = app.add_subcommand("count", "enumerate the ground states of an instance");
    count_cmd->add_option("instance", count_input, "instance file")->required();
    count_cmd->add_option("--cap", count.cap, "largest enumerated set")->capture_default_str();
    count_cmd->add_option("--b", count.ica.b, "ICA sweep exponent past the exact oracle")->capture_default_str();

    // sample
    SampleRequest sample;
    sample.ica.b = 14;
    std::string sample_input;
    std::string budget;
    std::string sample_gs;
    auto* sample_cmd = app.add_subcommand("sample", "draw samples from an instance or noisy instance");
    sample_cmd->add_option("input", sample_input, "instance or noisy instance file")->required();
    sample_cmd->add_option("--sampler", sample.sampler, "sa, sqa or ica")->capture_default_str();
    sample_cmd->add_option("--gauges", sample.gauges, "random gauges")->capture_default_str();
    sample_cmd->add_option("--reads", sample.reads, "reads per gauge")->capture_default_str();
    sample_cmd->add_option("--sweep-budget", budget, "t20, t200 or a sweep count");
    sample_cmd->add_option("--slices", sample.sqa.trotter_slices, "SQA Trotter slices")->capture_default_str();
    sample_cmd->add_option("--b", sample.ica.b, "ICA sweep exponent")->capture_default_str();
    sample_cmd->add_option("--ground-states", sample_gs, "ground-state file for the hit fraction");

    // analyze
    AnalyzeRequest analyze;
    std::vector<std::string> records;
    std::vector<std::string> gs_files;
    std::vector<std::string> compare;
    auto* analyze_cmd = app.add_subcommand("analyze", "fairness reports from records");
    analyze_cmd->add_option("records", records, "records files or directories");
    analyze_cmd->add_option("--ground-states", gs_files, "ground-state files")->required();
    analyze_cmd->add_option("--floor", analyze.floor, "minimum ground-state hits")->capture_default_str();
    analyze_cmd->add_option("--bootstrap", analyze.bootstrap, "bootstrap resamples")->capture_default_str();
    analyze_cmd->add_option("--baseline-trials", analyze.baseline_trials, "uniform baseline trials")
        ->capture_default_str();
    analyze_cmd->add_option("--compare", compare, "two record sets to join")->expected(2);

    // noise
    NoiseRequest noise;
    std::string noise_input;
    auto* noise_cmd = app.add_subcommand("noise", "write a noisy copy of an instance");
    noise_cmd->add_option("instance", noise_input, "instance file")->required();
    noise_cmd->add_option("--sigma-j", noise.sigma_j, "coupler noise standard deviation")->capture_default_str();
    noise_cmd->add_option("--sigma-h", noise.sigma_h, "field noise standard deviation")->capture_default_str();

    // run
    std::string manifest_path;
    std::string preset = "desk";
    auto* run_cmd = app.add_subcommand("run", "full experiment from a manifest");
    run_cmd->add_option("--manifest", manifest_path, "experiment manifest (JSON)");
    run_cmd->add_option("--preset", preset, "desk or production when no manifest is given")->capture_default_str();
    bool print_only = false;
    run_cmd->add_flag("--print-manifest", print_only, "print the resolved manifest and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (workers > 0) omp_set_num_threads(workers);
    const fs::path out_dir = out_path.empty() ? fs::path(".") : fs::path(out_path);

    try {
        if (*gen_cmd) {
            gen.seed = seed;
            gen.out = out_dir;
            gen.defects.qubits = defect_qubits;
            const GenSummary s = cmd_gen(gen);
            print_gen(out, s);
            if (s.accepted.empty() || static_cast<int>(s.accepted.size()) < s.requested) {
                err << fmt::format("gen: accepted {} of {} requested instances within the attempt budget\n",
                                   s.accepted.size(), s.requested);
                return kExitShortfall;
            }
        } else if (*count_cmd) {
            count.instance = count_input;
            count.out = out_path;
            count.ica.seed = seed;
            const CountResult r = cmd_count(count);
            const GroundStateSet& set = r.ground_states.set;
            out << fmt::format("n_gs {}\nmin_energy {}\nprovenance {}\nmethod {}\nfile {}\n", set.count,
                               set.min_energy, set.exact ? "exact" : "heuristic", r.ground_states.method,
                               r.file.string());
            if (r.ground_states.ica_status) out << "ica_status " << to_string(*r.ground_states.ica_status) << "\n";
        } else if (*sample_cmd) {
            sample.input = sample_input;
            sample.seed = seed;
            sample.out = out_path;
            if (!budget.empty()) sample.sweep_budget = parse_sweep_budget(budget);
            if (!sample_gs.empty()) sample.ground_states = fs::path(sample_gs);
            const SampleSummary s = cmd_sample(sample);
            out << fmt::format("records {}\nfile {}\n", s.records, s.file.string());
            if (s.ica_status) out << "ica_status " << to_string(*s.ica_status) << "\n";
            if (s.hit_fraction) {
                out << fmt::format("hit_fraction {:.6f}\n", *s.hit_fraction);
                if (*s.hit_fraction == 0.0) return kExitNoHits;
            }
            if (s.records == 0) return kExitNoHits;
        } else if (*analyze_cmd) {
            for (const auto& r : records) analyze.records.emplace_back(r);
            for (const auto& g : gs_files) analyze.ground_states.emplace_back(g);
            if (!compare.empty()) analyze.compare = {compare[0], compare[1]};
            analyze.seed = seed;
            analyze.out = out_dir;
            const AnalyzeResult r = cmd_analyze(analyze);
            const auto kept = min_solutions_filter(r.reports, analyze.floor);
            out << fmt::format("reports {}\nkept {}\n", r.reports.size(), kept.size());
            if (r.comparison) {
                out << fmt::format("compared {}{}\n", r.comparison->rows.size(),
                                   r.comparison->disjoint ? " (disjoint)" : "");
            }
        } else if (*noise_cmd) {
            noise.instance = noise_input;
            noise.seed = seed;
            noise.out = out_path;
            const fs::path file = cmd_noise(noise);
            out << "file " << file.string() << "\n";
        } else if (*run_cmd) {
            ExperimentManifest m;
            if (!manifest_path.empty()) {
                m = ExperimentManifest::from_json(io::read_file(manifest_path));
            } else if (preset == "desk") {
                m = ExperimentManifest::desk();
                m.seed = seed;
            } else if (preset == "production") {
                m = ExperimentManifest::production();
                m.seed = seed;
            } else {
                throw UsageError("unknown preset '" + preset + "' (expected desk or production)");
            }
            if (print_only) {
                out << m.to_json();
                return kExitOk;
            }
            const ExperimentResult r = run_experiment(m, out_dir);
            out << fmt::format("artifacts {}\nmanifest {}\n", r.artifacts.size(), r.manifest.string());
            if (r.shortfall) {
                err << "run: some instance slots exhausted the attempt budget\n";
                return kExitShortfall;
            }
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const io::ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const IntegrityError& e) {
        err << "integrity error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitOk;
}

} // namespace fairsample::pipeline
