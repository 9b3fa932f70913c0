#pragma once

// Sequence files (JSON), search configuration files and CSV output.

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pulsegate/core.hpp"
#include "pulsegate/optimizer.hpp"

namespace pulsegate::io {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kUnits = "omega_c=1";
inline constexpr const char* kToolVersion = "0.1.0";

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Compact description a sequence was generated from.
struct SequenceDescriptor {
  Parametrization kind = Parametrization::kSymmetric;
  int n_pulses = 0;
  std::vector<double> durations;
  /// Empty for shaped pulses.
  std::vector<double> gaps;
  std::vector<double> amplitudes;
  double omega = 0.0;

  /// Only kSymmetric, kEqualAmplitude and kShaped have a descriptor form.
  PulseSequence expand() const;
  bool operator==(const SequenceDescriptor&) const = default;
};

struct SequenceFile {
  int schema_version = kSchemaVersion;
  TrapConfig trap;
  PulseSequence sequence;
  std::optional<SequenceDescriptor> descriptor;
};

/// Pulses may be omitted when a descriptor is present; they are then
/// expanded from it. Unknown fields, a wrong schema version or units, and
/// malformed values throw ParseError.
SequenceFile parse_sequence_file(const std::string& text);
std::string serialize(const SequenceFile& file);

SequenceFile read_sequence_file(const std::filesystem::path& path);
void write_sequence_file(const std::filesystem::path& path, const SequenceFile& file);

/// Search configuration as JSON; every field is optional and unknown fields
/// are rejected.
SearchConfig parse_search_config(const std::string& text);
std::string serialize(const SearchConfig& config);

/// Shortest round-trip decimal form, independent of the locale.
std::string format_double(double x);

/// CSV with a `#` comment header carrying the schema and tool version and
/// the seed.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& columns, std::uint64_t seed,
            const std::string& command);

  CsvWriter& cell(double x);
  CsvWriter& cell(long long x);
  CsvWriter& cell(int x) { return cell(static_cast<long long>(x)); }
  CsvWriter& cell(const std::string& s);
  void end_row();

 private:
  std::ostream& out_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

std::string read_text(const std::filesystem::path& path);

}  // namespace pulsegate::io
