#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kencl/geometry.hpp"
#include "kencl/linalg.hpp"
#include "kencl/operator_lab.hpp"
#include "kencl/sturm_liouville.hpp"

namespace kencl::io {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Configuration problems; `problems` lists every violation found.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// A persisted file no longer matches its recorded digest.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FieldType { number, integer, string, boolean, number_or_auto };

struct FieldSpec {
  FieldType type = FieldType::number;
  /// Null when the field is required (or optional without default, see `optional`).
  nlohmann::json default_value;
  bool optional = false;
  std::optional<double> min;
  std::optional<double> max;
  bool min_exclusive = false;
  bool max_exclusive = false;
  std::vector<std::string> choices;
  /// Names an output file; resolved against the run directory.
  bool output_path = false;
  /// Names an input file; digested into the run record.
  bool input_path = false;
  std::string help;
};

using Schema = std::map<std::string, FieldSpec>;

/// Schema of a subcommand's parameters (keys are the kebab-case flag names).
const Schema& schema_for(const std::string& command);
std::vector<std::string> known_commands();

/// Validated parameters of one subcommand, defaults filled.
struct RunConfig {
  std::string command;
  nlohmann::json params = nlohmann::json::object();

  bool has(const std::string& key) const { return params.contains(key) && !params[key].is_null(); }
  double number(const std::string& key) const { return params.at(key).get<double>(); }
  long long integer(const std::string& key) const { return params.at(key).get<long long>(); }
  std::string string(const std::string& key) const { return params.at(key).get<std::string>(); }
  bool boolean(const std::string& key) const { return params.at(key).get<bool>(); }
  std::uint64_t seed(const std::string& key) const { return params.at(key).get<std::uint64_t>(); }

  /// {"command": ..., "params": {...}}.
  nlohmann::json to_json() const;
};

/// Validates a raw document {"command": c, "params": {...}} (or a flat object with a
/// "command" key); unknown keys and range violations are all reported in one ConfigError.
RunConfig validate_config(const nlohmann::json& raw);
RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& config, const std::filesystem::path& path);

/// Canonical text of a JSON value: sorted keys, shortest round-trip numbers, 2-space
/// indent, trailing newline. Throws std::domain_error on non-finite numbers.
std::string canonical_json(const nlohmann::json& j);

/// Shortest round-trip decimal of a finite double.
std::string format_number(double v);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Writes bytes, creating parent directories; errors carry the path.
void write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Writes a CSV table; all cells are finite numbers or pre-formatted strings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row(std::vector<std::string> cells);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string cell(double v);
std::string cell(bool v);
std::string cell(long long v);

std::string polyline_csv(const std::vector<ComplexPoint>& points);
std::string sl_eigen_csv(const sl::SLContainmentReport& report);
std::string constants_csv(const std::vector<double>& p_values);

nlohmann::json region_json(const geometry::DiskFamilyRegion& region, const std::string& kind,
                           std::optional<double> gamma);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json problem_to_json(const lab::KreinPerturbationProblem& problem);
lab::KreinPerturbationProblem problem_from_json(const nlohmann::json& j);

struct ManifestEntry {
  std::string path;  // relative to the run directory
  std::string sha256;
};

/// Everything needed to reproduce a run.
struct RunRecord {
  RunConfig config;
  std::string version = kArtifactVersion;
  std::string started;
  std::string finished;
  std::vector<ManifestEntry> inputs;
  std::vector<ManifestEntry> outputs;

  nlohmann::json to_json() const;
  static RunRecord from_json(const nlohmann::json& j);
};

/// UTC timestamp in ISO 8601.
std::string utc_now();

/// Writes `report` as canonical JSON to `path` and records it in the outputs manifest.
std::filesystem::path write_report(RunRecord& record, const std::filesystem::path& run_dir,
                                   const std::string& relative_path, const nlohmann::json& report);

/// Digests `relative_path` under `run_dir` into the record's outputs.
void record_output(RunRecord& record, const std::filesystem::path& run_dir, const std::string& relative_path);

void write_run_record(const RunRecord& record, const std::filesystem::path& run_dir);
RunRecord read_run_record(const std::filesystem::path& path);

/// Recomputes every output digest; throws IntegrityError naming the first mismatch.
void verify_manifest(const RunRecord& record, const std::filesystem::path& run_dir);

}  // namespace kencl::io
