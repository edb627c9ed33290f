#pragma once

#include <cstdint>
#include <vector>

#include "queuenet/likelihood.hpp"
#include "queuenet/sampler_state.hpp"

namespace queuenet {

// Before/after snapshot of one job touched by a staged move.
struct JobPatch {
  Job before;
  Job after;
};

// Log-density factor change of one job: the service-density term f and the
// queue-mechanism term h, on both sides of the move. Jobs whose routing terms
// could change never appear here — paths are fixed under departure moves.
struct FactorDelta {
  JobId job = kNoJob;
  double f_before = 0.0;
  double f_after = 0.0;
  double h_before = 0.0;
  double h_after = 0.0;
};

// A fully evaluated departure move, ready to apply atomically or discard.
struct StagedUpdate {
  JobId moved = kNoJob;
  double d_old = 0.0;
  double d_new = 0.0;
  bool feasible = false;
  double delta = kNegInf;  // log-density change; -inf when infeasible
  std::uint64_t base_version = 0;
  double log_density_before = 0.0;
  std::vector<JobPatch> patches;     // jobs with changed stored fields
  std::vector<FactorDelta> factors;  // jobs with changed likelihood factors
};

// Evaluates moving job e's departure — and with it the arrival of its path
// successor — to d_new. Runs the discipline-specific propagation on the two
// affected queues (successor's arrival change first, then e's departure
// change), gathering patches, factor deltas and feasibility. The state is
// used as scratch space but is restored exactly before returning.
StagedUpdate propose_departure_change(SamplerState& state, JobId e, double d_new);

// Installs a staged update produced against the current state version and
// advances the version. Throws std::logic_error when the update is stale,
// infeasible, or does not match the state it claims to start from.
void apply_update(SamplerState& state, const StagedUpdate& update);

// Undoes the most recently applied update, restoring fields, indexes, version
// and log density bit-exactly. Throws std::logic_error on version mismatch.
void rollback_update(SamplerState& state, const StagedUpdate& update);

}  // namespace queuenet
