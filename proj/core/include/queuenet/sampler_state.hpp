#pragma once

#include <cstdint>
#include <vector>

#include "queuenet/indexes.hpp"
#include "queuenet/rng.hpp"
#include "queuenet/types.hpp"

namespace queuenet {

// Mutable bundle threaded through proposals, updates and parameter moves.
// `version` increments on every applied modification; staged updates carry the
// version they were computed against and refuse to apply against any other.
struct SamplerState {
  NetworkConfig net;
  Theta theta;
  EventLog log;
  EventIndex events;
  IntervalIndex intervals;
  std::vector<JobId> latent;    // departures the sampler may move
  std::vector<char> is_latent;  // indexed by JobId
  Rng rng;
  std::uint64_t version = 0;
  double log_density = 0.0;

  void rebuild_indexes();
  void refresh_log_density();
};

// Builds a state around a complete event log: re-derives services and
// auxiliaries (throws std::runtime_error when infeasible), builds the indexes
// and computes the initial log density.
SamplerState make_sampler_state(const NetworkConfig& net, Theta theta, EventLog log,
                                std::vector<JobId> latent, std::uint64_t seed);

}  // namespace queuenet
