#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crowdmeasure/config.hpp"
#include "crowdmeasure/io.hpp"
#include "crowdmeasure/transport.hpp"

namespace crowdmeasure {

struct CommandOptions {
  std::optional<std::string> out;
  int threads = 1;
  std::optional<std::uint64_t> seed;
};

/// Applies --out / --seed overrides.
ExperimentConfig apply_overrides(ExperimentConfig cfg, const CommandOptions& opts);

struct ParticlesOutput {
  std::filesystem::path trajectory_csv;
  std::filesystem::path final_json;
  std::size_t steps = 0;
};

ParticlesOutput cmd_particles(const ExperimentConfig& cfg, const CommandOptions& opts = {});

struct SimulateOutput {
  MeshLevel level;
  std::vector<std::filesystem::path> snapshots;
  std::filesystem::path steps_jsonl;
  std::size_t steps = 0;
  double max_mass_error = 0.0;
};

SimulateOutput cmd_simulate(const ExperimentConfig& cfg, std::optional<int> level,
                            const CommandOptions& opts = {});

struct ConvergeOutput {
  std::vector<MetricsRow> rows;
  /// w1 + atomization_bound at the last sample time, one per level.
  std::vector<double> final_upper;
  /// Empty with a single level.
  std::optional<bool> monotone;
  std::filesystem::path metrics_csv;
  std::filesystem::path summary_json;
};

ConvergeOutput cmd_converge(const ExperimentConfig& cfg, const CommandOptions& opts = {});

struct ProjectOutput {
  MeshLevel level;
  std::filesystem::path density_csv;
  W1Result projection_error;
};

ProjectOutput cmd_project(const ExperimentConfig& cfg, std::optional<int> level,
                          const CommandOptions& opts = {});

}  // namespace crowdmeasure
