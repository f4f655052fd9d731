#include "fairsample/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <system_error>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "fairsample/hash.hpp"

namespace fairsample::io {

using nlohmann::json;

ParseError::ParseError(std::string source, int line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message),
      source_(std::move(source)),
      line_(line) {}

const char* to_string(CountProvenance provenance) {
    switch (provenance) {
        case CountProvenance::Exact: return "exact";
        case CountProvenance::Heuristic: return "heuristic";
        case CountProvenance::Uncounted: return "uncounted";
    }
    return "uncounted";
}

namespace {

constexpr std::string_view kInstanceMagic = "fairsample-instance";
constexpr std::string_view kNoisyMagic = "fairsample-noisy";
constexpr std::string_view kGroundStateMagic = "fairsample-groundstates";
constexpr std::string_view kRecordsMagic = "fairsample-records";

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

/// Line cursor that reports 1-based line numbers in its errors.
class LineReader {
public:
    LineReader(std::string_view text, std::string_view source) : text_(text), source_(source) {}

    bool done() const { return pos_ >= text_.size(); }
    int line() const { return line_; }

    [[noreturn]] void fail(const std::string& message) const { throw ParseError(source_, line_, message); }

    std::string_view next() {
        if (done()) {
            ++line_;
            fail("unexpected end of file");
        }
        const std::size_t end = text_.find('\n', pos_);
        std::string_view line = text_.substr(pos_, end == std::string_view::npos ? std::string_view::npos : end - pos_);
        pos_ = end == std::string_view::npos ? text_.size() : end + 1;
        ++line_;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        return line;
    }

    /// Next line as `key value...`; returns the values.
    std::vector<std::string_view> keyed(std::string_view key) {
        auto f = split_ws(next());
        if (f.empty() || f[0] != key) fail("expected '" + std::string(key) + "'");
        f.erase(f.begin());
        return f;
    }

    std::string_view single(std::string_view key) {
        const auto v = keyed(key);
        if (v.size() != 1) fail("'" + std::string(key) + "' takes exactly one value");
        return v[0];
    }

    void expect_end() {
        while (!done()) {
            if (!split_ws(next()).empty()) fail("trailing content");
        }
    }

private:
    std::string_view text_;
    std::string source_;
    std::size_t pos_ = 0;
    int line_ = 0;
};

template <class T>
T parse_number(const LineReader& r, std::string_view s, std::string_view what) {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        r.fail("bad " + std::string(what) + " '" + std::string(s) + "'");
    }
    return v;
}

void check_magic(LineReader& r, std::string_view magic) {
    const auto f = split_ws(r.next());
    if (f.size() != 2 || f[0] != magic) r.fail("not a " + std::string(magic) + " file");
    const int version = parse_number<int>(r, f[1], "format version");
    if (version != kFormatVersion) r.fail("unsupported format version " + std::to_string(version));
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

void format_graph_header(std::string& out, const ChimeraGraph& g) {
    out += fmt::format("c {}\n", g.cells());
    out += "defect_qubits";
    for (int q : g.defects().qubits) out += fmt::format(" {}", q);
    out += "\ndefect_couplers";
    for (const Coupler& e : g.defects().couplers) out += fmt::format(" {}-{}", e.a, e.b);
    out += "\n";
}

ChimeraGraph parse_graph_header(LineReader& r) {
    const int c = parse_number<int>(r, r.single("c"), "lattice size");
    if (c < 1 || c > 16) r.fail("lattice size c must be in [1, 16]");
    const int sites = 8 * c * c;
    const auto qubit = [&](std::string_view s) {
        const int q = parse_number<int>(r, s, "qubit index");
        if (q < 0 || q >= sites) r.fail(fmt::format("qubit {} outside [0, {})", q, sites));
        return q;
    };
    Defects d;
    for (auto q : r.keyed("defect_qubits")) d.qubits.push_back(qubit(q));
    for (auto e : r.keyed("defect_couplers")) {
        const auto dash = e.find('-');
        if (dash == std::string_view::npos) r.fail("defect coupler must read a-b");
        const int a = qubit(e.substr(0, dash));
        const int b = qubit(e.substr(dash + 1));
        if (!is_chimera_coupler(c, a, b)) r.fail(fmt::format("{}-{} is not a lattice coupler", a, b));
        d.couplers.emplace_back(a, b);
    }
    try {
        return build_chimera(c, d);
    } catch (const std::exception& ex) {
        r.fail(ex.what());
    }
}

/// Reads `couplers n` and n lines `i j J [extra...]` covering every active
/// coupler exactly once; returns the coupler index per line.
std::vector<int> parse_coupler_block(LineReader& r, const ChimeraGraph& g, std::size_t extra,
                                     const std::function<void(int, std::span<const std::string_view>)>& row) {
    const auto n = parse_number<std::size_t>(r, r.single("couplers"), "coupler count");
    if (n != static_cast<std::size_t>(g.num_couplers())) {
        r.fail(fmt::format("graph has {} active couplers, header says {}", g.num_couplers(), n));
    }
    std::vector<int> order;
    std::vector<bool> seen(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        const auto f = split_ws(r.next());
        if (f.size() != 2 + extra) r.fail(fmt::format("expected {} fields", 2 + extra));
        const int a = parse_number<int>(r, f[0], "qubit index");
        const int b = parse_number<int>(r, f[1], "qubit index");
        const int e = g.coupler_index(Coupler(a, b));
        if (e < 0) r.fail(fmt::format("{}-{} is not an active coupler", a, b));
        if (seen[static_cast<std::size_t>(e)]) r.fail(fmt::format("coupler {}-{} repeated", a, b));
        seen[static_cast<std::size_t>(e)] = true;
        order.push_back(e);
        row(e, std::span<const std::string_view>(f).subspan(2));
    }
    return order;
}

CountProvenance parse_provenance(const LineReader& r, std::string_view s) {
    if (s == "exact") return CountProvenance::Exact;
    if (s == "heuristic") return CountProvenance::Heuristic;
    if (s == "uncounted") return CountProvenance::Uncounted;
    r.fail("unknown count provenance '" + std::string(s) + "'");
}

std::optional<IcaStatus> parse_ica_status(std::string_view s) {
    for (IcaStatus st : {IcaStatus::Converged, IcaStatus::Unconverged, IcaStatus::HitFloorUnmet}) {
        if (s == to_string(st)) return st;
    }
    return std::nullopt;
}

std::string fmt_stat(double v) { return std::isnan(v) ? "nan" : fmt::format("{:.6f}", v); }

} // namespace

std::string format_instance(const InstanceFile& file) {
    const Instance& inst = file.instance;
    validate_instance(inst);
    std::string out = fmt::format("{} {}\n", kInstanceMagic, kFormatVersion);
    format_graph_header(out, inst.graph);
    out += fmt::format("seed {}\ncount {}\nn_gs {}\nk {}\n", inst.seed, to_string(file.provenance), file.n_gs, file.k);
    out += fmt::format("couplers {}\n", inst.couplings.size());
    const auto couplers = inst.graph.couplers();
    for (std::size_t e = 0; e < couplers.size(); ++e) {
        out += fmt::format("{} {} {}\n", couplers[e].a, couplers[e].b, inst.couplings[e]);
    }
    return out;
}

InstanceFile parse_instance(std::string_view text, std::string_view source) {
    LineReader r(text, source);
    check_magic(r, kInstanceMagic);
    InstanceFile file;
    file.instance.graph = parse_graph_header(r);
    file.instance.seed = parse_number<std::uint64_t>(r, r.single("seed"), "seed");
    file.provenance = parse_provenance(r, r.single("count"));
    file.n_gs = parse_number<std::uint64_t>(r, r.single("n_gs"), "ground-state count");
    file.k = parse_number<int>(r, r.single("k"), "degeneracy exponent");
    file.instance.couplings.assign(static_cast<std::size_t>(file.instance.graph.num_couplers()), 0);
    parse_coupler_block(r, file.instance.graph, 1, [&](int e, std::span<const std::string_view> f) {
        const int j = parse_number<int>(r, f[0], "coupling");
        if (j == 0 || std::abs(j) < 5 || std::abs(j) > 7) r.fail(fmt::format("coupling {} outside {{±5, ±6, ±7}}", j));
        file.instance.couplings[static_cast<std::size_t>(e)] = j;
    });
    r.expect_end();
    return file;
}

std::string format_noisy(const NoisyInstance& noisy, std::string_view base_hash) {
    const Instance& base = noisy.base;
    std::string out = fmt::format("{} {}\nbase {}\n", kNoisyMagic, kFormatVersion, base_hash);
    format_graph_header(out, base.graph);
    out += fmt::format("seed {}\nnoise_seed {}\nsigma_j {}\nsigma_h {}\n", base.seed, noisy.seed,
                       fmt_double(noisy.sigma_j), fmt_double(noisy.sigma_h));
    out += fmt::format("couplers {}\n", base.couplings.size());
    const auto couplers = base.graph.couplers();
    for (std::size_t e = 0; e < couplers.size(); ++e) {
        out += fmt::format("{} {} {} {}\n", couplers[e].a, couplers[e].b, base.couplings[e],
                           fmt_double(noisy.coupler_noise[e]));
    }
    const auto active = base.graph.active_qubits();
    out += fmt::format("fields {}\n", active.size());
    for (std::size_t i = 0; i < active.size(); ++i) out += fmt::format("{} {}\n", active[i], fmt_double(noisy.field_noise[i]));
    return out;
}

NoisyFile parse_noisy(std::string_view text, std::string_view source) {
    LineReader r(text, source);
    check_magic(r, kNoisyMagic);
    NoisyFile file;
    file.base_hash = std::string(r.single("base"));
    NoisyInstance& n = file.noisy;
    n.base.graph = parse_graph_header(r);
    n.base.seed = parse_number<std::uint64_t>(r, r.single("seed"), "seed");
    n.seed = parse_number<std::uint64_t>(r, r.single("noise_seed"), "noise seed");
    n.sigma_j = parse_number<double>(r, r.single("sigma_j"), "sigma_j");
    n.sigma_h = parse_number<double>(r, r.single("sigma_h"), "sigma_h");
    if (!(n.sigma_j >= 0.0) || !(n.sigma_h >= 0.0)) r.fail("noise standard deviations must be non-negative");
    const auto ne = static_cast<std::size_t>(n.base.graph.num_couplers());
    n.base.couplings.assign(ne, 0);
    n.coupler_noise.assign(ne, 0.0);
    parse_coupler_block(r, n.base.graph, 2, [&](int e, std::span<const std::string_view> f) {
        const int j = parse_number<int>(r, f[0], "coupling");
        if (std::abs(j) < 5 || std::abs(j) > 7) r.fail(fmt::format("coupling {} outside {{±5, ±6, ±7}}", j));
        n.base.couplings[static_cast<std::size_t>(e)] = j;
        n.coupler_noise[static_cast<std::size_t>(e)] = parse_number<double>(r, f[1], "coupler noise");
    });
    const auto nq = parse_number<std::size_t>(r, r.single("fields"), "field count");
    if (nq != static_cast<std::size_t>(n.base.graph.num_active())) {
        r.fail(fmt::format("graph has {} active qubits, header says {}", n.base.graph.num_active(), nq));
    }
    n.field_noise.assign(nq, 0.0);
    std::vector<bool> seen(nq, false);
    for (std::size_t k = 0; k < nq; ++k) {
        const auto f = split_ws(r.next());
        if (f.size() != 2) r.fail("expected 2 fields");
        const int q = parse_number<int>(r, f[0], "qubit index");
        const int i = n.base.graph.is_active(q) ? n.base.graph.active_index(q) : -1;
        if (i < 0) r.fail(fmt::format("qubit {} is not active", q));
        if (seen[static_cast<std::size_t>(i)]) r.fail(fmt::format("field on qubit {} repeated", q));
        seen[static_cast<std::size_t>(i)] = true;
        n.field_noise[static_cast<std::size_t>(i)] = parse_number<double>(r, f[1], "field");
    }
    r.expect_end();
    return file;
}

std::string format_ground_states(const GroundStateFile& file) {
    const GroundStateSet& s = file.set;
    std::string out = fmt::format("{} {}\ninstance {}\n", kGroundStateMagic, kFormatVersion, file.instance_hash);
    out += fmt::format("min_energy {}\nn_gs {}\nprovenance {}\nmethod {}\nstatus {}\nica_status {}\n", s.min_energy,
                       s.count, s.exact ? "exact" : "heuristic", file.method,
                       s.status == EnumerationStatus::Complete ? "complete" : "overflow",
                       file.ica_status ? to_string(*file.ica_status) : "-");
    out += fmt::format("configs {}\n", s.configs.size());
    for (const SpinConfig& c : s.configs) out += c.to_hex() + "\n";
    return out;
}

GroundStateFile parse_ground_states(std::string_view text, std::string_view source) {
    LineReader r(text, source);
    check_magic(r, kGroundStateMagic);
    GroundStateFile file;
    file.instance_hash = std::string(r.single("instance"));
    GroundStateSet& s = file.set;
    s.min_energy = parse_number<std::int64_t>(r, r.single("min_energy"), "energy");
    s.count = parse_number<std::uint64_t>(r, r.single("n_gs"), "ground-state count");
    const auto prov = r.single("provenance");
    if (prov != "exact" && prov != "heuristic") r.fail("provenance must be exact or heuristic");
    s.exact = prov == "exact";
    file.method = std::string(r.single("method"));
    const auto status = r.single("status");
    if (status != "complete" && status != "overflow") r.fail("status must be complete or overflow");
    s.status = status == "complete" ? EnumerationStatus::Complete : EnumerationStatus::Overflow;
    const auto ica = r.single("ica_status");
    if (ica != "-") {
        file.ica_status = parse_ica_status(ica);
        if (!file.ica_status) r.fail("unknown ica status '" + std::string(ica) + "'");
    }
    const auto n = parse_number<std::size_t>(r, r.single("configs"), "config count");
    for (std::size_t k = 0; k < n; ++k) {
        const auto line = r.next();
        try {
            s.configs.push_back(SpinConfig::from_hex(line));
        } catch (const std::exception& ex) {
            r.fail(ex.what());
        }
        if (k > 0 && !(s.configs[k - 1] < s.configs[k])) r.fail("configs must be sorted and distinct");
    }
    if (s.status == EnumerationStatus::Complete && n != s.count) {
        r.fail(fmt::format("n_gs {} but {} configs listed", s.count, n));
    }
    r.expect_end();
    return file;
}

std::string format_records(const RecordsFile& file) {
    const RecordsHeader& h = file.header;
    json head = {{"format", kRecordsMagic},
                 {"version", kFormatVersion},
                 {"instance", h.instance_hash},
                 {"noisy", h.noisy_hash.empty() ? json(nullptr) : json(h.noisy_hash)},
                 {"sampler", h.sampler},
                 {"params", h.params},
                 {"params_hash", h.params_hash},
                 {"gauges", h.gauges},
                 {"reads", h.reads},
                 {"seed", h.seed},
                 {"records", file.records.size()}};
    if (h.ica_status) head["ica"] = {{"status", to_string(*h.ica_status)}, {"sweeps", h.ica_sweeps}};
    std::string out = head.dump() + "\n";
    for (const SampleRecord& rec : file.records) {
        const json j = {{"sampler", rec.sampler}, {"params_hash", rec.params_hash}, {"gauge", rec.gauge},
                        {"config", rec.config.to_hex()}, {"energy", rec.energy}, {"sweeps", rec.sweeps},
                        {"seed", rec.seed}};
        out += j.dump() + "\n";
    }
    return out;
}

RecordsFile parse_records(std::string_view text, std::string_view source) {
    LineReader r(text, source);
    RecordsFile file;
    std::size_t expected = 0;
    try {
        const json head = json::parse(r.next());
        if (head.at("format") != kRecordsMagic) r.fail("not a records file");
        if (head.at("version") != kFormatVersion) r.fail("unsupported records version");
        RecordsHeader& h = file.header;
        h.instance_hash = head.at("instance").get<std::string>();
        if (!head.at("noisy").is_null()) h.noisy_hash = head.at("noisy").get<std::string>();
        h.sampler = head.at("sampler").get<std::string>();
        h.params = head.at("params").get<std::string>();
        h.params_hash = head.at("params_hash").get<std::string>();
        h.gauges = head.at("gauges").get<int>();
        h.reads = head.at("reads").get<int>();
        h.seed = head.at("seed").get<std::uint64_t>();
        expected = head.at("records").get<std::size_t>();
        if (head.contains("ica")) {
            h.ica_status = parse_ica_status(head["ica"].at("status").get<std::string>());
            if (!h.ica_status) r.fail("unknown ica status");
            h.ica_sweeps = head["ica"].at("sweeps").get<std::uint64_t>();
        }
    } catch (const json::exception& ex) {
        r.fail(std::string("bad header: ") + ex.what());
    }
    while (!r.done()) {
        const auto line = r.next();
        if (split_ws(line).empty()) continue;
        try {
            const json j = json::parse(line);
            SampleRecord rec;
            rec.sampler = j.at("sampler").get<std::string>();
            rec.params_hash = j.at("params_hash").get<std::string>();
            rec.gauge = j.at("gauge").get<int>();
            rec.config = SpinConfig::from_hex(j.at("config").get<std::string>());
            rec.energy = j.at("energy").get<double>();
            rec.sweeps = j.at("sweeps").get<std::uint64_t>();
            rec.seed = j.at("seed").get<std::uint64_t>();
            file.records.push_back(std::move(rec));
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& ex) {
            r.fail(std::string("bad record: ") + ex.what());
        }
    }
    if (file.records.size() != expected) {
        r.fail(fmt::format("header announces {} records, found {}", expected, file.records.size()));
    }
    return file;
}

std::string format_report_tsv(std::span<const FairnessReport> reports, std::uint64_t floor) {
    std::string out =
        "instance_id\tN\tN_GS\tsampler\ttotal\texcited\ttheta_max\tci_low\tci_high\tbaseline\tbaseline_low\t"
        "baseline_high\tchi2_p\texcited_rate\tkept\n";
    for (const FairnessReport& r : reports) {
        out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", r.instance_id, r.n_sites,
                           r.n_gs, r.sampler, r.total, r.excited, fmt_stat(r.theta_max), fmt_stat(r.ci.low),
                           fmt_stat(r.ci.high), fmt_stat(r.baseline_theta_max), fmt_stat(r.baseline_ci.low),
                           fmt_stat(r.baseline_ci.high), fmt_stat(r.chi2_pvalue), fmt_stat(r.excited_rate()),
                           r.total >= floor ? 1 : 0);
    }
    return out;
}

std::string format_histogram_csv(const FairnessReport& report) {
    std::string out = "x,count\n";
    for (std::size_t k = 0; k < report.ranked.counts.size(); ++k) {
        out += fmt::format("{:.6f},{}\n", report.ranked.x[k], report.ranked.counts[k]);
    }
    return out;
}

std::string format_comparison_tsv(const Comparison& comparison) {
    std::string out = "instance_id\ttheta_a\ta_low\ta_high\ttheta_b\tb_low\tb_high\n";
    for (const ComparisonRow& row : comparison.rows) {
        out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", row.instance_id, fmt_stat(row.theta_a),
                           fmt_stat(row.ci_a.low), fmt_stat(row.ci_a.high), fmt_stat(row.theta_b),
                           fmt_stat(row.ci_b.low), fmt_stat(row.ci_b.high));
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string file_hash(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

std::string instance_id(std::string_view hash) { return std::string(hash.substr(0, 12)); }

} // namespace fairsample::io
