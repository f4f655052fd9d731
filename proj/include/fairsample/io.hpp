#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fairsample/fairness.hpp"
#include "fairsample/generator.hpp"
#include "fairsample/instance.hpp"
#include "fairsample/oracle.hpp"
#include "fairsample/samplers.hpp"

namespace fairsample::io {

inline constexpr int kFormatVersion = 1;

/// Malformed input; what() reads "<source>:<line>: <message>".
class ParseError : public std::runtime_error {
public:
    ParseError(std::string source, int line, const std::string& message);

    const std::string& source() const { return source_; }
    int line() const { return line_; }

private:
    std::string source_;
    int line_;
};

// ---------------------------------------------------------------------------
// Instance files: text header plus one `i j J` line per active coupler, in
// graph coupler order. Content hash = SHA-256 of the file bytes.

struct InstanceFile {
    Instance instance;
    /// Counting metadata from generation; n_gs == 0 means not counted.
    std::uint64_t n_gs = 0;
    int k = 0;
    CountProvenance provenance = CountProvenance::Uncounted;
};

std::string format_instance(const InstanceFile& file);
InstanceFile parse_instance(std::string_view text, std::string_view source = "<instance>");

// ---------------------------------------------------------------------------
// Noisy instances embed the base couplings plus per-coupler and per-qubit
// noise, and carry the hash of the base instance file.

struct NoisyFile {
    NoisyInstance noisy;
    std::string base_hash;
};

std::string format_noisy(const NoisyInstance& noisy, std::string_view base_hash);
NoisyFile parse_noisy(std::string_view text, std::string_view source = "<noisy>");

// ---------------------------------------------------------------------------
// Ground-state files.

struct GroundStateFile {
    std::string instance_hash;
    GroundStateSet set;
    std::string method;  ///< frontier, brute_force or ica
    std::optional<IcaStatus> ica_status;
};

std::string format_ground_states(const GroundStateFile& file);
GroundStateFile parse_ground_states(std::string_view text, std::string_view source = "<ground states>");

// ---------------------------------------------------------------------------
// Records: JSON lines, a header object followed by one object per record.

struct RecordsHeader {
    std::string instance_hash;  ///< base instance the records are judged against
    std::string noisy_hash;     ///< empty when sampled on the base Hamiltonian
    std::string sampler;
    std::string params;  ///< canonical parameter text
    std::string params_hash;
    int gauges = 0;
    int reads = 0;
    std::uint64_t seed = 0;
    std::optional<IcaStatus> ica_status;
    std::uint64_t ica_sweeps = 0;
};

struct RecordsFile {
    RecordsHeader header;
    std::vector<SampleRecord> records;
};

std::string format_records(const RecordsFile& file);
RecordsFile parse_records(std::string_view text, std::string_view source = "<records>");

// ---------------------------------------------------------------------------
// Analysis outputs.

/// Tab-separated, one row per report; `kept` marks rows passing the floor.
std::string format_report_tsv(std::span<const FairnessReport> reports, std::uint64_t floor);
/// `x,count` rows of the rank-sorted histogram.
std::string format_histogram_csv(const FairnessReport& report);
std::string format_comparison_tsv(const Comparison& comparison);

// ---------------------------------------------------------------------------
// Files.

/// Throws std::runtime_error naming the path when unreadable.
std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary and renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string file_hash(const std::filesystem::path& path);

/// Short identifier derived from a content hash.
std::string instance_id(std::string_view hash);

const char* to_string(CountProvenance provenance);

} // namespace fairsample::io
