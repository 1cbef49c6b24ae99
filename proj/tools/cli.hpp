#pragma once

#include "dista/experiments.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dista::cli {

enum ExitCode : int {
  kOk = 0,
  kInvalidConfig = 1,
  kStepsizeViolation = 2,
  kIoError = 3,
  kSolverError = 4,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parsed and validated configuration document. Keys not listed in the
/// schema are rejected.
struct RunConfig {
  std::optional<std::string> experiment;
  TrialConfig trial;
  std::vector<std::size_t> m_values{2, 4, 6, 8, 10, 12, 14, 16};
  std::vector<std::size_t> node_values{2, 4, 6, 8, 10};
  std::size_t trials = 20;
  std::vector<double> snr_db_values{10, 20, 30, 40, 50};
  std::vector<SolverKind> solvers{SolverKind::dista, SolverKind::dsm, SolverKind::admm};
  std::vector<std::size_t> sweep_m_values{8, 12};
  std::optional<std::filesystem::path> output;
  std::size_t workers = 1;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Command-line and environment overrides, applied after the file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::filesystem::path> output;
};

/// Applies DISTA_WORKERS from the environment, then explicit overrides.
void apply_overrides(RunConfig& config, const Overrides& overrides);

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_phase(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_snr(const RunConfig& config, std::ostream& out, std::ostream& err);

/// `consensus_override` replaces the topology built from the config; tests
/// use it to audit deliberately malformed matrices.
int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err,
                 const ConsensusMatrix* consensus_override = nullptr);

}  // namespace dista::cli
