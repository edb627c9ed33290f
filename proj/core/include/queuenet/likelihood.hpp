#pragma once

#include <limits>

#include "queuenet/indexes.hpp"
#include "queuenet/types.hpp"

namespace queuenet {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log density of an exponential service draw; -inf for negative services.
double service_logpdf(double theta, double s);

// log probability of stepping from `from` to `to` (kFinalQueue allowed) under
// the uniform routing distribution; -inf if `to` is not a successor.
double transition_logprob(const NetworkConfig& net, QueueId from, QueueId to);

// Queue-mechanism factor of one job: 0 for FCFS, -log(occupancy at
// commencement) for RSS (from the stored auxiliary), -log(occupancy at
// departure) for PS (from the index).
double h_log_factor(const NetworkConfig& net, const EventIndex& index, const Job& job);

// Joint log-density of the trajectory over paths, times and services, summed
// from the stored fields (trusted to satisfy the discipline equations).
// Includes the routing terms — one per hop plus the exit step per task — so
// values are comparable across path configurations.
double log_joint_stored(const NetworkConfig& net, const Theta& theta, const EventLog& log,
                        const EventIndex& index);

// Independent evaluation from (a, d, queue, chain) alone: re-derives service
// times and auxiliaries on a copy, then sums. Returns -inf when the times are
// not realizable under the disciplines.
double log_joint(const NetworkConfig& net, const Theta& theta, const EventLog& log);

}  // namespace queuenet
