#pragma once

#include <cstdint>
#include <vector>

#include "queuenet/observe.hpp"
#include "queuenet/sampler_state.hpp"

namespace queuenet {

// Horizontal slice bracket: stepping out by doubling, then shrinkage, with
// the doubling acceptance test on candidate points.
struct SliceConfig {
  double w = 1.0;        // initial bracket width; must be > 0
  int max_step_out = 16; // doubling cap
  int max_shrink = 64;   // shrinkage cap; collapse keeps the current value
};

struct SliceStats {
  bool moved = false;
  bool stuck = false;  // shrinkage collapsed; current value retained
  int evals = 0;       // density evaluations spent
};

// One slice-sampling update of the departure time of latent job e, targeting
// its full conditional given every other coordinate. The accepted point is
// applied atomically (the paired downstream arrival moves with it).
SliceStats slice_update_departure(SamplerState& state, JobId e, const SliceConfig& cfg);

struct SweepStats {
  int moved = 0;
  int stuck = 0;
  std::int64_t evals = 0;
};

// Updates every latent departure once, scanning jobs in order of their
// departure time at the start of the sweep.
SweepStats sweep(SamplerState& state, const SliceConfig& cfg);

// Gamma(shape, rate) prior on each service rate; the (0, 0) default is the
// scale-invariant improper prior, giving a Gamma(n_q, S_q) conditional.
struct GammaPrior {
  double shape = 0.0;
  double rate = 0.0;
};

// Redraws every theta[q] from its conditional given the current trajectory
// and adjusts the stored log density in closed form.
void gibbs_theta(SamplerState& state, const GammaPrior& prior = {});

// Complete-data maximum-likelihood update theta[q] = n_q / S_q.
void ml_theta_step(SamplerState& state);

struct PosteriorConfig {
  int sweeps = 1000;
  int burn_in = 100;
  int thin = 1;
  SliceConfig slice{0.0, 16, 64};  // w <= 0 selects the observed mean response
  GammaPrior prior;                // improper by default
  int sweeten_sweeps = 5;          // initialization refinement sweeps
  bool collect_jobs = false;       // record per-draw service/waiting vectors
  std::uint64_t seed = 0;
};

// Builds a feasible state for a partially observed dataset: hidden tasks get
// counter-consistent entry times, prior paths, and rejection-sampled service
// times (zero on failure), then a few refinement sweeps.
SamplerState initialize_state(const ObservedDataset& data, const NetworkConfig& net,
                              const PosteriorConfig& cfg);

struct PosteriorDraws {
  std::vector<Theta> thetas;                  // one per retained sweep
  std::vector<std::vector<double>> services;  // per retained sweep, per job
  std::vector<std::vector<double>> waits;     //   (only when collect_jobs)
  std::vector<double> mean_service;           // per-job posterior means
  std::vector<double> mean_wait;
  EventLog last_log;                          // job layout; final sweep's times
  std::vector<char> job_latent;               // 1 for imputed departures
  int draws = 0;
  std::int64_t stuck_moves = 0;
};

// initialize, then alternate latent sweeps with theta Gibbs steps, retaining
// draws after burn-in at the given thinning.
PosteriorDraws run_posterior(const ObservedDataset& data, const NetworkConfig& net,
                             const PosteriorConfig& cfg);

// Stochastic EM: one imputation sweep then the complete-data ML update per
// iteration. Returns the theta iterate path (cfg.sweeps long).
std::vector<Theta> stochastic_em(const ObservedDataset& data, const NetworkConfig& net,
                                 const PosteriorConfig& cfg);

}  // namespace queuenet
