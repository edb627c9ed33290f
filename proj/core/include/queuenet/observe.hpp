#pragma once

#include <cstdint>
#include <vector>

#include "queuenet/rng.hpp"
#include "queuenet/types.hpp"

namespace queuenet {

// Per-task Bernoulli(p) logging. Tasks that are not chosen leave no trace
// except their contribution to the cumulative entry counter.
struct ObservationScheme {
  double p = 1.0;
  std::uint64_t seed = 0;
};

struct ObservedJob {
  TaskId task = -1;
  JobId job = kNoJob;
  QueueId queue = 0;
  double a = 0.0;
  double d = 0.0;
};

// One logged task: its job chain in path order (the entry pseudo-job first)
// plus the total number of tasks, recorded and hidden, that entered the
// system up to and including this task's entry.
struct ObservedTask {
  TaskId task = -1;
  int n0 = 0;
  std::vector<ObservedJob> jobs;
};

struct ObservedDataset {
  ObservationScheme scheme;
  int num_queues = 0;
  int total_tasks = 0;
  std::vector<ObservedTask> records;  // sorted by entry time
};

ObservedDataset observe(const EventLog& log, const ObservationScheme& scheme);

// Mean of d - a over all recorded jobs past the entry queue; 0 when the
// dataset records no such jobs.
double mean_observed_response(const ObservedDataset& data);

// Structural and counter consistency; empty result means valid.
std::vector<std::string> validate_dataset(const ObservedDataset& data);

}  // namespace queuenet
