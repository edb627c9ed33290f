#pragma once

#include <vector>

#include "queuenet/observe.hpp"
#include "queuenet/sampler.hpp"

namespace queuenet {

// One (time bin, queue) cell of a reconstruction grid. Means are NaN and
// has_value is false when no task entering the bin visited the queue.
struct DiagnosisCell {
  int jobs = 0;
  double mean_service = 0.0;
  double mean_wait = 0.0;
  bool has_value = false;
};

// Per-bin, per-queue reconstruction of where time is spent. Tasks are binned
// by their entry time over [0, t_hi] (entries past t_hi are dropped, an entry
// exactly at t_hi lands in the last bin); every job of a task contributes its
// service and waiting estimate to the cell of its own queue. The entry
// queue's pseudo-jobs are arrival bookkeeping, so its column never fills.
struct Diagnosis {
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::vector<std::vector<DiagnosisCell>> cells;  // [bin][queue]
};

struct DiagnoseConfig {
  int bins = 50;
  double t_hi = 0.0;        // <= 0: use the latest recorded departure
  bool use_em = false;      // point reconstruction from the stochastic-EM
                            // final state instead of posterior means
  PosteriorConfig sampler;  // sweeps, burn-in, thinning, prior, seed
};

// Fits the partially observed dataset and grids the per-job estimates of
// service and waiting time. The posterior path averages each job's service
// and waiting over the retained draws; bin membership uses the final retained
// state's entry times, which pins every recorded task exactly. Estimator and
// dataset errors propagate unchanged.
Diagnosis diagnose(const ObservedDataset& data, const NetworkConfig& net,
                   const DiagnoseConfig& cfg);

// Baseline that attributes the whole response to processing: every recorded
// job contributes s = d - a and w = 0. Needs no inference, so it grids the
// records directly.
Diagnosis diagnose_wait_zero(const ObservedDataset& data, const NetworkConfig& net, int bins,
                             double t_hi = 0.0);

// Root mean squared difference of per-cell mean service times over the cells
// populated in both grids. The grids must share bin count, edges, and queue
// count; having no populated cell in common is an error.
double diagnosis_rmse(const Diagnosis& got, const Diagnosis& want);

}  // namespace queuenet
