#include "queuenet/likelihood.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "queuenet/simulate.hpp"

namespace queuenet {

double service_logpdf(double theta, double s) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw std::invalid_argument("service rate must be positive and finite");
  }
  if (s < 0.0 || !std::isfinite(s)) return kNegInf;
  return std::log(theta) - theta * s;
}

double transition_logprob(const NetworkConfig& net, QueueId from, QueueId to) {
  if (from < 0 || from >= net.num_queues()) {
    throw std::out_of_range("transition source queue out of range");
  }
  const auto& succ = net.successors[from];
  for (QueueId cand : succ) {
    if (cand == to) return -std::log(static_cast<double>(succ.size()));
  }
  return kNegInf;
}

double h_log_factor(const NetworkConfig& net, const EventIndex& index, const Job& job) {
  switch (net.queues[job.queue].discipline) {
    case Discipline::Fcfs:
      return 0.0;
    case Discipline::Rss: {
      if (job.rss.nq <= 0) {
        throw std::logic_error("job " + std::to_string(job.id) +
                               " has a non-positive selection pool size");
      }
      return -std::log(static_cast<double>(job.rss.nq));
    }
    case Discipline::Ps:
      return -std::log(static_cast<double>(ps_crowd(index, job)));
  }
  throw std::logic_error("unknown discipline");
}

double log_joint_stored(const NetworkConfig& net, const Theta& theta, const EventLog& log,
                        const EventIndex& index) {
  if (static_cast<int>(theta.size()) != net.num_queues()) {
    throw std::invalid_argument("theta must have one rate per queue");
  }
  double total = 0.0;
  for (const Job& job : log.jobs) {
    total += service_logpdf(theta[job.queue], job.s);
    total += h_log_factor(net, index, job);
    if (job.pi_pred != kNoJob) {
      total += transition_logprob(net, log.jobs[job.pi_pred].queue, job.queue);
    }
    if (job.pi_succ == kNoJob) {
      total += transition_logprob(net, job.queue, kFinalQueue);
    }
    if (total == kNegInf) return kNegInf;
  }
  return total;
}

double log_joint(const NetworkConfig& net, const Theta& theta, const EventLog& log) {
  EventLog copy = log;
  std::string error;
  if (!try_recover_services(net, copy, &error)) return kNegInf;
  EventIndex index;
  index.build(net, copy);
  return log_joint_stored(net, theta, copy, index);
}

}  // namespace queuenet
