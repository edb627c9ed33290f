#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "queuenet/observe.hpp"
#include "queuenet/sampler.hpp"
#include "queuenet/types.hpp"

namespace queuenet {

// A nested alternative: the base network plus one extra "bottleneck" queue
// spliced between a chosen set of work queues and their former successors.
struct BottleneckHypothesis {
  NetworkConfig base;
  NetworkConfig augmented;
  QueueId bottleneck = -1;           // id of the added queue in `augmented`
  std::vector<QueueId> attached;     // work queues rerouted through it
};

// Splices one new queue (FCFS, single processor) after the attached queues.
// Every attached queue's successors become {bottleneck}; the bottleneck
// inherits the union of their former successors.
BottleneckHypothesis make_bottleneck_hypothesis(const NetworkConfig& base,
                                                const std::vector<QueueId>& attached);

// All C(k, 2) two-queue hypotheses over the given work queues.
std::vector<BottleneckHypothesis> pair_hypotheses(const NetworkConfig& base,
                                                  const std::vector<QueueId>& work_queues);

// One-sided test of "the added queue does no work": z is the posterior mean
// of its mean service time in units of the posterior standard deviation.
struct TestResult {
  double z = 0.0;
  double mean_m = 0.0;
  double sigma = 0.0;
  bool reject = false;
  int draws_used = 0;
};

// draws are posterior samples of the bottleneck's mean service time 1/theta.
// Rejects when z = mean/sd exceeds `critical`.
TestResult bottleneck_z(const std::vector<double>& draws, double critical = 1.96);

struct SelectionConfig {
  int sweeps = 5000;
  int burn_in = 1000;
  int thin = 10;             // thinning of the mean-service draws
  double critical = 1.96;    // one-sided normal critical value
  SliceConfig slice{0.0, 16, 64};  // w <= 0 selects the mean observed residence
  std::uint64_t seed = 0;
};

struct DetectionOutcome {
  std::vector<TestResult> per_candidate;
  bool bottleneck_detected = false;  // any candidate rejects
  double max_z = 0.0;
};

// Fits every candidate's augmented model to the dataset and tests whether its
// bottleneck queue has nonzero mean service. The data are recorded against
// the base topology; at each attached queue the recorded departure is
// reinterpreted as the (unobserved) hand-off into the bottleneck, so that
// hand-off time is sampled while everything recorded stays fixed.
DetectionOutcome detect_missing_queue(const ObservedDataset& data, const NetworkConfig& base,
                                      const std::vector<BottleneckHypothesis>& candidates,
                                      const SelectionConfig& cfg);

// Area under the ROC curve of scores against binary labels, counting tied
// score pairs as half. Throws when only one label is present.
double roc_auc(const std::vector<std::pair<double, bool>>& scores);

}  // namespace queuenet
