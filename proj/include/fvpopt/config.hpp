#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fvpopt/engine.hpp"
#include "fvpopt/operators.hpp"
#include "fvpopt/problems.hpp"
#include "fvpopt/space.hpp"

namespace fvpopt {

struct RandomProjectionQpParams {
  std::size_t dim = 0;
  std::vector<Halfspace> halfspaces;
  Matrix q;
  Vector c;
  /// Seed of the generated instance when halfspace_count was given.
  std::optional<std::uint64_t> instance_seed;
};

enum class Activation { single_edge, bernoulli };

struct ConsensusParams {
  std::size_t agents = 0;
  std::size_t local_dim = 0;
  std::vector<Vector> targets;
  EdgeSet edges;
  Activation activation = Activation::single_edge;
  double activation_probability = 0.5;
  double mixing = 1.0;
};

struct SublevelParams {
  std::size_t dim = 0;
  /// norm, max_coordinate or squared_norm.
  std::string constraint;
  double level = 0.0;
  Matrix q;
  Vector c;
};

enum class FaultInjection { none, expanding_operator };

struct ProblemConfig {
  std::string family;
  std::variant<RandomProjectionQpParams, ConsensusParams, SublevelParams> params;
  /// Replaces the family's operator by T(x) = 2x (for exercising the checks).
  FaultInjection fault = FaultInjection::none;
  /// Declared constants of the family objective, used for admissibility.
  double rho = 0.0;
  double lipschitz_k = 0.0;
};

struct EnsembleConfig {
  std::size_t realizations = 100;
  double tol = 1e-2;
  /// 0 = hardware concurrency.
  std::size_t threads = 0;
};

struct OutputConfig {
  std::string csv_path = "trajectories.csv";
  std::string summary_path = "summary.json";
};

/// Property suites run before the ensemble.
inline constexpr const char* kCheckSuites[] = {
    "quasi_nonexpansive", "averaged_descent", "averaged_quasi_nonexpansive",
    "fixed_set_agreement", "gradient",        "constants",
};

struct ChecksConfig {
  std::vector<std::string> suites;
  std::size_t samples = 10000;
};

struct ExperimentConfig {
  ProblemConfig problem;
  AlgorithmConfig algorithm;
  EnsembleConfig ensemble;
  OutputConfig output;
  ChecksConfig checks;
};

/// Parses an INI document with sections [problem], [algorithm], [ensemble],
/// [output] and [checks]. Lists are bracketed (JSON syntax for numbers,
/// bare identifiers for suite names). Throws ConfigError naming the first
/// offending key; AdmissibilityError (with the interval) for a bad beta.
ExperimentConfig parse_config(const std::string& text);

/// Reads and parses a config file. Throws ConfigError if it cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace fvpopt
