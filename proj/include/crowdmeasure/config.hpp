#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdmeasure/scheme.hpp"
#include "crowdmeasure/velocity.hpp"

namespace crowdmeasure {

/// Serializable description of a VelocityModel (built-in variants only).
struct ModelConfig {
  int dim = 1;
  int n_agents = 1;
  std::string desired_type = "zero";  // zero | constant
  std::vector<double> desired_c;
  std::string kernel_type = "case_study";  // case_study | attraction | none
  double a = 0.01;
  double eps = 0.025;
  double cap_radius = 1.0;
  std::string neighborhood_type = "ball";  // ball | sector
  double R = 0.1;
  double alpha = 0.0;
  double b = 0.02;
  std::optional<std::vector<double>> fixed_axis;  // heading; absent means from desired

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

VelocityModel build_model(const ModelConfig& cfg);

/// Parses a bare model block (the "model" object of an experiment config).
ModelConfig parse_model_config(const std::string& text, const std::string& origin = "<model>");

struct InitialConfig {
  std::string type = "atoms";  // atoms | uniform_random
  std::vector<std::vector<double>> positions;
  std::size_t count = 0;
  double lo = 0.0;
  double hi = 1.0;
  std::optional<std::uint64_t> seed;

  friend bool operator==(const InitialConfig&, const InitialConfig&) = default;
};

struct ScheduleConfig {
  // Either {delta, ks} (with optional v_ref, default velocity_bound) or an
  // explicit single (h, dt) pair.
  std::optional<double> delta;
  std::vector<int> ks;
  std::optional<double> v_ref;
  std::optional<double> h;
  std::optional<double> dt;

  bool is_explicit() const { return h.has_value(); }
  friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

struct ExperimentConfig {
  ModelConfig model;
  InitialConfig initial;
  double T = 0.1;
  ScheduleConfig schedule;
  std::string outputs = "out";
  std::vector<double> w1_sample_times;
  std::vector<double> snapshot_times;
  std::optional<double> oracle_dt;
  std::size_t max_cells = 10'000'000;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses and validates. Errors name the offending JSON path and, when the
/// source text is known, the line it sits on.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::string& path);

nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Initial positions (deterministic for a given seed).
std::vector<Point> initial_positions(const ExperimentConfig& cfg);

/// Schedule levels resolved against the model's velocity bound.
MeshSchedule resolve_schedule(const ExperimentConfig& cfg);

/// The level matching k, or h = 1/k with dt from the schedule formula.
MeshLevel resolve_level(const ExperimentConfig& cfg, std::optional<int> k);

/// Snapshot and W1 sample times with defaults {T/2, T}.
std::vector<double> snapshot_times(const ExperimentConfig& cfg);
std::vector<double> sample_times(const ExperimentConfig& cfg);

/// Oracle Euler step: finest dt / 10, shrunk so that T is a whole number of
/// steps, unless oracle_dt is configured.
double oracle_step(const ExperimentConfig& cfg);

}  // namespace crowdmeasure
