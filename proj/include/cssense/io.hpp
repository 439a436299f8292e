#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "cssense/harness.hpp"

namespace cssense::io {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Config documents

/// Parses a config file; throws std::invalid_argument on syntax or schema errors.
Json load_config(const std::filesystem::path& path);
/// Key-sorted, whitespace-free serialisation.
std::string canonical_dump(const Json& doc);
/// FNV-1a 64 of the canonical dump, as 16 lowercase hex digits.
std::string config_hash(const Json& doc);

enum class ExperimentKind { detection_mc, recovery_mc, scan_sim };
ExperimentKind experiment_kind(const Json& doc);

DetectionConfig detection_config(const Json& doc);
RecoveryConfig recovery_config(const Json& doc);

struct ScanSetup {
  ScanConfig config;
  BandPlan plan;
  TrafficModel traffic;
};
ScanSetup scan_setup(const Json& doc);

// ---------------------------------------------------------------------------
// Reports

/// Shortest round-trip form at 9 significant digits, locale independent.
std::string format_double(double v);
double parse_double(std::string_view s);

void write_detection_csv(const PdPfaCurve& curve, const std::filesystem::path& path);
void write_recovery_csv(const RecoveryReport& report, const std::filesystem::path& path);
void write_scan_csv(const OccupancyReport& report, const std::filesystem::path& path);

PdPfaCurve read_detection_csv(const std::filesystem::path& path);
RecoveryReport read_recovery_csv(const std::filesystem::path& path);
std::vector<ScanRecord> read_scan_csv(const std::filesystem::path& path);

Json to_json(const PdPfaCurve& curve);
Json to_json(const RecoveryReport& report);
Json to_json(const OccupancyReport& report);
void write_json(const Json& doc, const std::filesystem::path& path);

extern const std::vector<std::string> kDetectionColumns;
extern const std::vector<std::string> kRecoveryColumns;
extern const std::vector<std::string> kScanColumns;

/// Raw table access: header plus rows of fields.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
Table read_table(const std::filesystem::path& path);

/// One value per line, or "re,im" pairs; a non-numeric first line is skipped.
Eigen::VectorXcd read_samples(const std::filesystem::path& path, bool* complex_valued = nullptr);
void write_vector_csv(const Eigen::VectorXd& v, const std::filesystem::path& path,
                      std::string_view column = "value");

// ---------------------------------------------------------------------------
// Run manifest

struct RunManifest {
  std::string config_hash;
  std::string tool_version{kToolVersion};
  std::string command;
  std::string started_at;
  std::string finished_at;
  Seed base_seed = 0;
  std::vector<std::string> output_paths;
};

std::string utc_timestamp();
void write_manifest(const RunManifest& m, const std::filesystem::path& dir);
RunManifest read_manifest(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Command line

/// Exit code: 0 success, 2 invalid arguments, 1 runtime failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace cssense::io
