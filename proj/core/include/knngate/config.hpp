#pragma once

#include <stdexcept>
#include <string>

#include "knngate/experiments.hpp"

namespace knngate {

/// Raised on any malformed configuration; the message names the offending
/// line or key. Mapped to exit code 2 by the CLI.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A fully resolved simulation request: which experiment to run and its
/// sweep, including the scenario.
struct SimulationSpec {
  ExperimentKind kind;
  SweepConfig sweep;
};

/// Parse the key-value configuration format:
///
///   schema_version = 1
///   [scenario]
///   d = 2
///   labels = 3
///   ...
///   [sweep]
///   experiment = mode_stability
///   ...
///
/// Sections hold `key = value` pairs; `#` starts a comment; list values are
/// comma- or space-separated; matrix rows are separated by `;`. Unknown or
/// missing keys raise ConfigError naming the key; syntax errors name the
/// line.
SimulationSpec parse_simulation_config(const std::string& text);

/// Canonical emission of a spec in the same format; parsing it back yields
/// an equivalent spec.
std::string write_simulation_config(const SimulationSpec& spec);

}  // namespace knngate
