#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "touchreg/resection.hpp"
#include "touchreg/rig.hpp"

namespace touchreg {

// Settings shared by the CLI and the service. File format: one `key = value`
// per line, '#' starts a comment. Keys:
//   max_iterations initial_damping damping_up damping_down convergence_tol
//   huber_delta multistart_count rng_seed max_skew conditioning_offset
//   sequence_length
// conditioning_offset is `local_backward` (default) or `world_up`.
struct AppConfig {
  SolverConfig solver;
  double max_skew = kDefaultMaxSkewSeconds;
  ConditioningOffset conditioning_offset = ConditioningOffset::LocalBackward;
  std::size_t sequence_length = 50;
};

// Applies the keys present in the stream on top of `base`. Unknown keys and
// malformed values raise Error(Parse) with the line number.
AppConfig parse_config(std::istream& in, AppConfig base = {});
AppConfig load_config(const std::filesystem::path& path, AppConfig base = {});

}  // namespace touchreg
