#include <catch_amalgamated.hpp>

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fairsample/hash.hpp"
#include "fairsample/io.hpp"
#include "fairsample/oracle.hpp"
#include "fairsample/pipeline.hpp"
#include "helpers.hpp"

using namespace fairsample;
using namespace fairsample::pipeline;

namespace {

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args) {
    args.insert(args.begin(), "fairsample");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("fairsample_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

/// Relative path -> bytes for every regular file under root.
std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = io::read_file(e.path());
    }
    return files;
}

fs::path write_instance(const fs::path& path, const Instance& inst) {
    io::write_file_atomic(path, io::format_instance({inst, 0, 0, CountProvenance::Uncounted}));
    return path;
}

} // namespace

TEST_CASE("gen writes the requested number of filtered instances", "[cli]") {
    const fs::path dir = scratch("gen");
    const CliRun r = cli({"gen", "--c", "2", "--count", "20", "--seed", "7", "--out", dir.string()});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("accepted 20/20") != std::string::npos);
    CHECK(r.out.find("rejections ") != std::string::npos);

    int files = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() != ".inst") continue;
        ++files;
        const io::InstanceFile f = io::parse_instance(io::read_file(e.path()), e.path().string());
        // Independent check of the recorded metadata against the oracle.
        const GroundStateSet gs = frontier_enumerate(f.instance);
        CHECK(f.provenance == CountProvenance::Exact);
        CHECK(f.n_gs == gs.count);
        CHECK(f.k >= 1);
        CHECK(gs.count == 3ULL << f.k);
        CHECK(closed_under_flip(gs));
        CHECK(free_spin_audit(f.instance).empty());
    }
    CHECK(files == 20);

    const auto manifest = io::read_file(dir / "gen_manifest.json");
    CHECK(manifest.find("\"accepted\": 20") != std::string::npos);
}

TEST_CASE("gen is byte-reproducible and independent of the worker count", "[cli]") {
    const fs::path a = scratch("gen_a");
    const fs::path b = scratch("gen_b");
    REQUIRE(cli({"--seed", "11", "--workers", "1", "gen", "--c", "2", "--count", "6", "--out", a.string()}).code == 0);
    REQUIRE(cli({"gen", "--c", "2", "--count", "6", "--seed", "11", "--out", b.string()}).code == 0);
    const auto sa = snapshot(a);
    CHECK(sa.size() == 7);
    CHECK(sa == snapshot(b));
}

TEST_CASE("gen beyond the exact oracle flags heuristic counts", "[cli][slow]") {
    const fs::path dir = scratch("gen_c5");
    const CliRun r = cli({"gen", "--c", "5", "--count", "1", "--seed", "1", "--heuristic-b", "9", "--max-attempts",
                          "400", "--out", dir.string()});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("count=heuristic") != std::string::npos);
    const io::InstanceFile f = io::parse_instance(io::read_file(dir / "c5_0000.inst"));
    CHECK(f.provenance == CountProvenance::Heuristic);
    CHECK(f.instance.graph.num_sites() == 200);
}

TEST_CASE("gen reports a shortfall with statistics", "[cli]") {
    const fs::path dir = scratch("gen_fail");
    const CliRun r = cli({"gen", "--c", "1", "--count", "2", "--max-attempts", "1", "--seed", "2", "--out",
                          dir.string()});
    CHECK(r.code == kExitShortfall);
    CHECK(r.out.find("attempts 2") != std::string::npos);
    CHECK(r.err.find("within the attempt budget") != std::string::npos);
    CHECK(cli({"gen", "--c", "0", "--out", dir.string()}).code == kExitUsage);
}

TEST_CASE("count on a ferromagnetic cell finds the two aligned states", "[cli]") {
    const fs::path dir = scratch("count_ferro");
    const fs::path inst = write_instance(dir / "ferro.inst", testing::uniform_instance(build_chimera(1, {}), 5));
    const CliRun r = cli({"count", inst.string(), "--out", dir.string()});
    REQUIRE(r.code == kExitOk);
    const io::GroundStateFile gs = io::parse_ground_states(io::read_file(dir / "ferro.gs"));
    CHECK(gs.set.count == 2);
    CHECK(gs.set.min_energy == -80);
    CHECK(gs.set.exact);
    CHECK(gs.instance_hash == io::file_hash(inst));
    REQUIRE(gs.set.configs.size() == 2);
    CHECK(gs.set.configs[0].to_hex() == "8:00");
    CHECK(gs.set.configs[1].to_hex() == "8:ff");
}

TEST_CASE("count agrees with brute force on small lattices", "[cli]") {
    const fs::path dir = scratch("count_cross");
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng = make_rng(seed, 99);
        const Instance inst = draw_couplings(testing::trimmed_c2(22 + static_cast<int>(seed)), rng);
        const fs::path f = write_instance(dir / ("x" + std::to_string(seed) + ".inst"), inst);
        REQUIRE(cli({"count", f.string(), "--out", dir.string()}).code == 0);
        const io::GroundStateFile gs = io::parse_ground_states(io::read_file(dir / ("x" + std::to_string(seed) + ".gs")));
        const GroundStateSet bf = brute_force_enumerate(inst);
        CHECK(gs.set.min_energy == bf.min_energy);
        CHECK(gs.set.count == bf.count);
        CHECK(gs.set.configs == bf.configs);
    }
}

TEST_CASE("count reports parse errors with the line number", "[cli]") {
    const fs::path dir = scratch("count_bad");
    Rng rng = make_rng(1);
    const fs::path f = write_instance(dir / "ok.inst", draw_couplings(build_chimera(1, {}), rng));
    std::string text = io::read_file(f);
    text.replace(text.find("couplers 16\n") + 12, 1, "Q");
    io::write_file_atomic(dir / "bad.inst", text);
    const CliRun r = cli({"count", (dir / "bad.inst").string()});
    CHECK(r.code == kExitFailure);
    CHECK(r.err.find("bad.inst:10:") != std::string::npos);
    CHECK(cli({"count", (dir / "missing.inst").string()}).code == kExitFailure);
}

TEST_CASE("sample follows the gauges x reads protocol", "[cli]") {
    const fs::path dir = scratch("sample_protocol");
    Rng rng = make_rng(5);
    const fs::path f = write_instance(dir / "cell.inst", draw_couplings(build_chimera(1, {}), rng));
    const CliRun r = cli({"sample", f.string(), "--sampler", "sa", "--sweep-budget", "1", "--gauges", "100", "--reads",
                          "1000", "--out", (dir / "r.jsonl").string()});
    REQUIRE(r.code == kExitOk);
    const io::RecordsFile rf = io::parse_records(io::read_file(dir / "r.jsonl"));
    CHECK(rf.records.size() == 100000);
    CHECK(rf.header.gauges == 100);
    CHECK(rf.header.reads == 1000);
    std::vector<int> per_gauge(100, 0);
    for (const auto& rec : rf.records) ++per_gauge[static_cast<std::size_t>(rec.gauge)];
    for (int n : per_gauge) CHECK(n == 1000);
}

TEST_CASE("sample reruns are byte-identical", "[cli]") {
    const fs::path dir = scratch("sample_det");
    REQUIRE(cli({"gen", "--c", "2", "--count", "1", "--seed", "3", "--out", dir.string()}).code == 0);
    const std::string inst = (dir / "c2_0000.inst").string();
    for (const std::string sampler : {"sa", "sqa"}) {
        const auto a = cli({"--seed", "9", "sample", inst, "--sampler", sampler, "--gauges", "3", "--reads", "4",
                            "--out", (dir / "a.jsonl").string()});
        const auto b = cli({"sample", inst, "--sampler", sampler, "--gauges", "3", "--reads", "4", "--seed", "9",
                            "--workers", "1", "--out", (dir / "b.jsonl").string()});
        REQUIRE(a.code == 0);
        REQUIRE(b.code == 0);
        CHECK(io::read_file(dir / "a.jsonl") == io::read_file(dir / "b.jsonl"));
        const auto c = cli({"sample", inst, "--sampler", sampler, "--gauges", "3", "--reads", "4", "--seed", "10",
                            "--out", (dir / "c.jsonl").string()});
        CHECK(io::read_file(dir / "a.jsonl") != io::read_file(dir / "c.jsonl"));
    }
}

TEST_CASE("sample with ica records the convergence status", "[cli]") {
    const fs::path dir = scratch("sample_ica");
    REQUIRE(cli({"gen", "--c", "2", "--count", "1", "--seed", "4", "--out", dir.string()}).code == 0);
    const std::string inst = (dir / "c2_0000.inst").string();
    REQUIRE(cli({"count", inst, "--out", dir.string()}).code == 0);
    const CliRun r = cli({"sample", inst, "--sampler", "ica", "--b", "12", "--seed", "1", "--ground-states",
                          (dir / "c2_0000.gs").string(), "--out", dir.string()});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("ica_status converged") != std::string::npos);
    CHECK(r.out.find("hit_fraction 1.000000") != std::string::npos);
    const io::RecordsFile rf = io::parse_records(io::read_file(dir / "c2_0000.ica.jsonl"));
    CHECK(rf.header.ica_status == IcaStatus::Converged);
    CHECK(rf.header.ica_sweeps >= 4096);
    CHECK(!rf.records.empty());

    const CliRun bad = cli({"sample", inst, "--sampler", "ica", "--b", "1", "--out", (dir / "u.jsonl").string()});
    CHECK(bad.out.find("ica_status unconverged") != std::string::npos);
    CHECK(bad.code == kExitNoHits);
}

TEST_CASE("sample usage errors", "[cli]") {
    const fs::path dir = scratch("sample_usage");
    Rng rng = make_rng(5);
    const fs::path f = write_instance(dir / "cell.inst", draw_couplings(build_chimera(1, {}), rng));
    CHECK(cli({"sample", f.string(), "--sampler", "qmc"}).code == kExitUsage);
    CHECK(cli({"sample", f.string(), "--sweep-budget", "t2000"}).code == kExitUsage);
    CHECK(cli({"sample", f.string(), "--gauges", "0"}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("sweep budget presets keep a 1:10 ratio", "[cli]") {
    CHECK(parse_sweep_budget("t20") == 100);
    CHECK(parse_sweep_budget("t200") == 1000);
    CHECK(parse_sweep_budget("t200") == 10 * parse_sweep_budget("t20"));
    CHECK(parse_sweep_budget("250") == 250);
    CHECK_THROWS_AS(parse_sweep_budget("0"), UsageError);
    CHECK_THROWS_AS(parse_sweep_budget("-4"), UsageError);
}

TEST_CASE("analyze: point mass on one of six states", "[cli]") {
    const fs::path dir = scratch("analyze_point");
    REQUIRE(cli({"gen", "--c", "2", "--count", "1", "--seed", "3", "--out", dir.string()}).code == 0);
    const fs::path inst = dir / "c2_0000.inst";
    REQUIRE(cli({"count", inst.string(), "--out", dir.string()}).code == 0);
    const io::GroundStateFile gs = io::parse_ground_states(io::read_file(dir / "c2_0000.gs"));
    REQUIRE(gs.set.count == 6);

    io::RecordsFile rf;
    rf.header.instance_hash = gs.instance_hash;
    rf.header.sampler = "sa";
    rf.header.params = "fixture";
    rf.header.params_hash = sha256_hex("fixture");
    for (int i = 0; i < 80; ++i) rf.records.push_back({"sa", rf.header.params_hash, 0, gs.set.configs[2], -1.0, 1, 0});
    SpinConfig excited = gs.set.configs[0];
    excited.flip(0);
    for (int i = 0; i < 20; ++i) rf.records.push_back({"sa", rf.header.params_hash, 0, excited, 0.0, 1, 0});
    io::write_file_atomic(dir / "point.jsonl", io::format_records(rf));

    const CliRun r = cli({"analyze", (dir / "point.jsonl").string(), "--ground-states", (dir / "c2_0000.gs").string(),
                          "--bootstrap", "1000", "--baseline-trials", "1000", "--out", (dir / "an").string()});
    REQUIRE(r.code == kExitOk);
    const std::string tsv = io::read_file(dir / "an" / "report.tsv");
    CHECK(tsv.find("\t6\tsa@1\t80\t20\t0.833333\t0.833333\t0.833333\t") != std::string::npos);
    CHECK(tsv.find("\t0.200000\t1\n") != std::string::npos);
    CHECK(fs::exists(dir / "an" / "hist" / (gs.instance_hash.substr(0, 12) + "_sa_1.csv")));

    // below the floor: reported, no histogram
    const CliRun r2 = cli({"analyze", (dir / "point.jsonl").string(), "--ground-states", (dir / "c2_0000.gs").string(),
                           "--floor", "81", "--bootstrap", "1000", "--out", (dir / "an2").string()});
    REQUIRE(r2.code == kExitOk);
    CHECK(r2.out.find("kept 0") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "an2" / "hist"));
}

TEST_CASE("analyze --compare of a record set with itself lies on the diagonal", "[cli]") {
    const fs::path dir = scratch("analyze_compare");
    REQUIRE(cli({"gen", "--c", "2", "--count", "2", "--seed", "5", "--out", (dir / "inst").string()}).code == 0);
    for (const std::string stem : {"c2_0000", "c2_0001"}) {
        const std::string inst = (dir / "inst" / (stem + ".inst")).string();
        REQUIRE(cli({"count", inst, "--out", (dir / "gs").string() + "/" + stem + ".gs"}).code == 0);
        REQUIRE(cli({"sample", inst, "--sampler", "sa", "--gauges", "4", "--reads", "25", "--out",
                     (dir / "rec").string() + "/" + stem + ".jsonl"})
                    .code == 0);
    }
    const CliRun r = cli({"analyze", "--compare", (dir / "rec").string(), (dir / "rec").string(), "--ground-states",
                          (dir / "gs" / "c2_0000.gs").string(), (dir / "gs" / "c2_0001.gs").string(), "--floor", "1",
                          "--bootstrap", "1000", "--out", (dir / "cmp").string()});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("compared 2") != std::string::npos);
    const std::string tsv = io::read_file(dir / "cmp" / "compare.tsv");
    std::istringstream lines(tsv);
    std::string line;
    std::getline(lines, line);
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        std::vector<std::string> f;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, '\t')) f.push_back(cell);
        REQUIRE(f.size() == 7);
        CHECK(f[1] == f[4]);
        CHECK(f[2] == f[5]);
        CHECK(f[3] == f[6]);
    }
    CHECK(rows == 2);
}

TEST_CASE("analyze refuses records of another instance", "[cli]") {
    const fs::path dir = scratch("analyze_mismatch");
    REQUIRE(cli({"gen", "--c", "2", "--count", "2", "--seed", "6", "--out", dir.string()}).code == 0);
    REQUIRE(cli({"count", (dir / "c2_0001.inst").string(), "--out", dir.string()}).code == 0);
    REQUIRE(cli({"sample", (dir / "c2_0000.inst").string(), "--sampler", "sa", "--gauges", "1", "--reads", "5",
                 "--out", dir.string()})
                .code == 0);
    const CliRun r = cli({"analyze", (dir / "c2_0000.sa.jsonl").string(), "--ground-states",
                          (dir / "c2_0001.gs").string(), "--bootstrap", "1000", "--out", dir.string()});
    CHECK(r.code == kExitFailure);
    CHECK(r.err.find("integrity error") != std::string::npos);
    CHECK(cli({"analyze", (dir / "c2_0000.sa.jsonl").string(), "--ground-states", (dir / "c2_0001.gs").string(),
               "--bootstrap", "10"})
              .code == kExitUsage);
}

TEST_CASE("noise writes a base-referencing noisy instance", "[cli]") {
    const fs::path dir = scratch("noise");
    REQUIRE(cli({"gen", "--c", "2", "--count", "1", "--seed", "8", "--out", dir.string()}).code == 0);
    const fs::path inst = dir / "c2_0000.inst";
    const std::string base_hash = io::file_hash(inst);
    const io::InstanceFile base = io::parse_instance(io::read_file(inst));

    REQUIRE(cli({"noise", inst.string(), "--out", (dir / "zero.noisy").string()}).code == 0);
    const io::NoisyFile zero = io::parse_noisy(io::read_file(dir / "zero.noisy"));
    CHECK(zero.base_hash == base_hash);
    CHECK(zero.noisy.base == base.instance);
    for (double v : zero.noisy.coupler_noise) CHECK(v == 0.0);
    for (double v : zero.noisy.field_noise) CHECK(v == 0.0);

    REQUIRE(cli({"noise", inst.string(), "--sigma-j", "0.5", "--sigma-h", "0.25", "--seed", "2", "--out",
                 (dir / "n.noisy").string()})
                .code == 0);
    const io::NoisyFile n = io::parse_noisy(io::read_file(dir / "n.noisy"));
    CHECK(n.noisy.coupler_noise.size() == static_cast<std::size_t>(base.instance.graph.num_couplers()));
    CHECK(n.noisy.field_noise.size() == static_cast<std::size_t>(base.instance.graph.num_active()));
    CHECK(n.noisy.sigma_j == 0.5);

    CHECK(cli({"noise", inst.string(), "--sigma-j", "-0.1"}).code == kExitUsage);
    CHECK(cli({"noise", inst.string(), "--sigma-h", "-1"}).code == kExitUsage);
    CHECK(cli({"sample", (dir / "n.noisy").string(), "--sampler", "ica"}).code == kExitUsage);

    // Noisy records are judged against the base ground states.
    REQUIRE(cli({"count", inst.string(), "--out", dir.string()}).code == 0);
    REQUIRE(cli({"sample", (dir / "n.noisy").string(), "--sampler", "sqa", "--gauges", "2", "--reads", "5", "--out",
                 (dir / "n.jsonl").string()})
                .code != kExitUsage);
    const io::RecordsFile rf = io::parse_records(io::read_file(dir / "n.jsonl"));
    CHECK(rf.header.instance_hash == base_hash);
    CHECK(rf.header.noisy_hash == io::file_hash(dir / "n.noisy"));
    CHECK(cli({"analyze", (dir / "n.jsonl").string(), "--ground-states", (dir / "c2_0000.gs").string(), "--bootstrap",
               "1000", "--floor", "0", "--out", (dir / "an").string()})
              .code == kExitOk);

    // A noisy file pointing at a different base cannot be analyzed against this one.
    std::string tampered = io::read_file(dir / "n.noisy");
    tampered.replace(tampered.find(base_hash), 4, "0000");
    io::write_file_atomic(dir / "t.noisy", tampered);
    REQUIRE(cli({"sample", (dir / "t.noisy").string(), "--sampler", "sa", "--gauges", "1", "--reads", "2", "--out",
                 (dir / "t.jsonl").string()})
                .code == kExitOk);
    const CliRun r = cli({"analyze", (dir / "t.jsonl").string(), "--ground-states", (dir / "c2_0000.gs").string(),
                          "--bootstrap", "1000", "--out", (dir / "an2").string()});
    CHECK(r.code == kExitFailure);
    CHECK(r.err.find("integrity error") != std::string::npos);
}

TEST_CASE("experiment manifests round-trip and validate", "[cli]") {
    const ExperimentManifest d = ExperimentManifest::desk();
    const ExperimentManifest back = ExperimentManifest::from_json(d.to_json());
    CHECK(back.to_json() == d.to_json());
    CHECK(back.noise_grid == d.noise_grid);
    CHECK(d.noise_grid.size() == 9);

    const ExperimentManifest partial = ExperimentManifest::from_json(R"({"sizes": [3], "instances_per_size": [4],
                                                                         "seed": 12})");
    CHECK(partial.sizes == std::vector<int>{3});
    CHECK(partial.seed == 12);
    CHECK(partial.gauges == d.gauges);

    CHECK_THROWS_AS(ExperimentManifest::from_json(R"({"sizes": [2, 3], "instances_per_size": [1]})"), UsageError);
    CHECK_THROWS_AS(ExperimentManifest::from_json(R"({"samplers": ["qmc"]})"), UsageError);
    CHECK_THROWS_AS(ExperimentManifest::from_json(R"({"noise_grid": [[-1, 0]]})"), UsageError);
    CHECK_THROWS_AS(ExperimentManifest::from_json("{"), UsageError);
}

TEST_CASE("production preset sizes and counts", "[cli]") {
    CHECK(production_instances(512) == 4164);
    CHECK(production_instances(648) == 6970);
    CHECK(production_instances(800) == 11199);
    CHECK(production_instances(968) == 16739);
    CHECK_THROWS_AS(production_instances(500), std::invalid_argument);
    const ExperimentManifest t = ExperimentManifest::production();
    CHECK(t.sizes == std::vector<int>{8, 9, 10, 11});
    CHECK(t.instances_per_size == std::vector<int>{4164, 6970, 11199, 16739});
    CHECK(t.gauges == 100);
    CHECK(t.reads == 1000);
    CHECK(t.ica.b == 19);
    CHECK(t.sweep_budgets == std::vector<std::uint64_t>{100, 1000});

    const auto grid = relative_noise_grid(5.0);
    REQUIRE(grid.size() == 9);
    CHECK(grid.front() == NoisePoint{0.0, 0.0});
    CHECK(grid.back() == NoisePoint{0.5, 0.5});
    CHECK(grid[1] == NoisePoint{0.0, 0.25});
}

TEST_CASE("full pipeline is byte-reproducible and hash-checked", "[cli][slow]") {
    ExperimentManifest m;
    m.sizes = {2};
    m.instances_per_size = {2};
    m.samplers = {"ica", "sqa"};
    m.sweep_budgets = {10, 100};
    m.gauges = 2;
    m.reads = 10;
    m.ica.b = 11;
    m.noise_grid = {{0.0, 0.0}, {0.25, 0.25}};
    m.seed = 21;
    m.floor = 5;
    m.bootstrap = 1000;
    m.baseline_trials = 1000;
    const fs::path a = scratch("exp_a");
    const fs::path b = scratch("exp_b");
    io::write_file_atomic(a.parent_path() / "fairsample_cli_manifest.json", m.to_json());

    const ExperimentResult ra = run_experiment(m, a);
    const CliRun rb = cli({"run", "--manifest", (a.parent_path() / "fairsample_cli_manifest.json").string(), "--out",
                           b.string(), "--workers", "1"});
    REQUIRE(rb.code == kExitOk);
    const auto sa = snapshot(a);
    CHECK(sa == snapshot(b));
    CHECK(sa.count("experiment.json") == 1);
    CHECK(sa.count("analysis/ica/report.tsv") == 1);
    CHECK(sa.count("analysis/sqa_b10/report.tsv") == 1);
    CHECK(sa.count("analysis/sqa_b10_noise1/report.tsv") == 1);
    CHECK(sa.count("analysis/compare_sqa/compare.tsv") == 1);
    CHECK(sa.size() == ra.artifacts.size() + 1);

    CHECK(verify_experiment(ra.manifest).empty());
    io::write_file_atomic(a / "analysis" / "ica" / "report.tsv", "tampered\n");
    CHECK(verify_experiment(ra.manifest) == std::vector<std::string>{"analysis/ica/report.tsv"});
}
