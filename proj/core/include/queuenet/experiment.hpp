#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "queuenet/observe.hpp"
#include "queuenet/selection.hpp"
#include "queuenet/types.hpp"

namespace queuenet {

// Entry queue fanning out uniformly over `work_queues` single-processor FCFS
// queues, each exiting directly.
NetworkConfig star_network(int work_queues);

// Collapses a log into base-topology records: per task, the entry pseudo-job
// plus a single work visit spanning entry -> final exit. Any downstream hops
// (a shared stage the analyst does not know about) fold into that span. Every
// task is recorded.
ObservedDataset observe_entry_work_exit(const EventLog& log, int num_queues);

// Detection study over a grid of bottleneck loads. Per utilization and rep,
// one dataset comes from the plain star network and is tested against every
// two-queue candidate (all should accept), and one dataset per candidate
// comes from that candidate's own bottlenecked topology and is tested against
// that candidate (all should reject). Errors are wrong calls out of all
// tests; the AUC pools every z against its arm label.
struct MissingQueueProtocol {
  int work_queues = 5;
  double arrival_rate = 1.0;
  double work_rate = 0.4;  // work-tier service rate (utilization 0.5 at 5 queues)
  std::vector<double> utilizations = {0.001, 0.1, 0.25, 0.5, 0.75};
  int tasks = 100;
  int reps = 5;  // dataset batches per utilization
  SelectionConfig fit;
};

struct MissingQueueTrial {
  double utilization = 0.0;
  bool truth_bottleneck = false;
  int rep = 0;
  int candidate = 0;
  double z = 0.0;
  bool reject = false;
  bool correct = false;
};

struct MissingQueueReport {
  std::vector<MissingQueueTrial> trials;
  std::vector<double> utilizations;
  std::vector<double> error_by_utilization;  // wrong-call fraction, aligned
  double auc = 0.0;                          // z against the true arm, pooled
};

MissingQueueReport experiment_missing_queue(const MissingQueueProtocol& protocol);

// One row per trial (CSV with header).
void write_missing_queue_trials_csv(const MissingQueueReport& report, std::ostream& out);
// Per-utilization error table plus the pooled AUC (CSV with header).
void write_missing_queue_summary_csv(const MissingQueueReport& report, std::ostream& out);

}  // namespace queuenet
