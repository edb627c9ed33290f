#include "queuenet/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "queuenet/likelihood.hpp"
#include "queuenet/propagate.hpp"
#include "queuenet/rng.hpp"
#include "queuenet/simulate.hpp"

namespace queuenet {

BottleneckHypothesis make_bottleneck_hypothesis(const NetworkConfig& base,
                                                const std::vector<QueueId>& attached) {
  if (attached.empty()) {
    throw std::invalid_argument("make_bottleneck_hypothesis: no attached queues");
  }
  for (QueueId q : attached) {
    if (q < 0 || q >= base.num_queues()) {
      throw std::invalid_argument("make_bottleneck_hypothesis: queue " + std::to_string(q) +
                                  " out of range");
    }
    if (q == base.initial_queue) {
      throw std::invalid_argument("make_bottleneck_hypothesis: cannot attach to the entry queue");
    }
  }

  BottleneckHypothesis hyp;
  hyp.base = base;
  hyp.attached = attached;
  hyp.augmented = base;
  hyp.bottleneck = base.num_queues();
  hyp.augmented.queues.push_back(QueueConfig{Discipline::Fcfs, 1});

  // The new queue inherits the union of the attached queues' successors.
  std::vector<QueueId> onward;
  for (QueueId q : attached) {
    for (QueueId next : base.successors[q]) {
      if (std::find(onward.begin(), onward.end(), next) == onward.end()) onward.push_back(next);
    }
    hyp.augmented.successors[q] = {hyp.bottleneck};
  }
  hyp.augmented.successors.push_back(onward);

  const std::vector<std::string> errors = validate_network(hyp.augmented);
  if (!errors.empty()) {
    throw std::invalid_argument("make_bottleneck_hypothesis: augmented network invalid: " +
                                errors.front());
  }
  return hyp;
}

std::vector<BottleneckHypothesis> pair_hypotheses(const NetworkConfig& base,
                                                  const std::vector<QueueId>& work_queues) {
  std::vector<BottleneckHypothesis> out;
  for (std::size_t i = 0; i < work_queues.size(); ++i) {
    for (std::size_t j = i + 1; j < work_queues.size(); ++j) {
      out.push_back(make_bottleneck_hypothesis(base, {work_queues[i], work_queues[j]}));
    }
  }
  return out;
}

TestResult bottleneck_z(const std::vector<double>& draws, double critical) {
  if (draws.size() < 2) {
    throw std::invalid_argument("bottleneck_z: need at least two draws");
  }
  double mean = 0.0;
  for (double m : draws) mean += m;
  mean /= static_cast<double>(draws.size());
  double ss = 0.0;
  for (double m : draws) ss += (m - mean) * (m - mean);
  const double sd = std::sqrt(ss / static_cast<double>(draws.size() - 1));
  if (!(sd > 0.0)) {
    throw std::runtime_error("bottleneck_z: degenerate draws (zero variance); the chain is not "
                             "mixing over the bottleneck's service time");
  }
  TestResult r;
  r.mean_m = mean;
  r.sigma = sd;
  r.z = mean / sd;
  r.reject = r.z > critical;
  r.draws_used = static_cast<int>(draws.size());
  return r;
}

double roc_auc(const std::vector<std::pair<double, bool>>& scores) {
  std::vector<double> pos, neg;
  for (const auto& [z, label] : scores) {
    (label ? pos : neg).push_back(z);
  }
  if (pos.empty() || neg.empty()) {
    throw std::invalid_argument("roc_auc: need both positive and negative labels");
  }
  double wins = 0.0;
  for (double p : pos) {
    for (double n : neg) {
      if (p > n) {
        wins += 1.0;
      } else if (p == n) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

namespace {

struct CensoredBuild {
  EventLog log;
  std::vector<JobId> latent;  // the hidden hand-off departures
  double mean_window = 1.0;   // mean width of the censored intervals
  double last_entry = 0.0;
};

// How the hidden hand-off departure inside each censored window is seeded.
// Mid: split every window at its midpoint, nudged only as far as the
// bottleneck's FCFS order requires (hand-offs assigned in increasing order of
// the recorded exits, so the single-server bottleneck can always serve them).
// Starting mid-window matters: a chain seeded with all hand-offs squeezed
// against the exits sits on the zero-service face of the bottleneck's
// posterior, where the improper rate prior concentrates, and can take many
// sweeps to escape even when the data favor a loaded bottleneck.
// Corner: squeeze each hand-off to just before the exit; always feasible, used
// as a fallback when the midpoint seed violates a work queue's discipline.
enum class SplitInit { Mid, Corner };

// Rebuilds the recorded trajectories against the augmented topology: each
// recorded visit to an attached queue (a, d) becomes that queue's job
// (a, x) followed by a bottleneck job (x, d) for a seed point x in (a, d];
// the hand-off x is latent, everything recorded stays pinned.
CensoredBuild build_censored(const ObservedDataset& data, const BottleneckHypothesis& hyp,
                             SplitInit init) {
  const NetworkConfig& net = hyp.augmented;
  CensoredBuild out;
  out.log.num_queues = net.num_queues();
  out.log.num_tasks = static_cast<int>(data.records.size());

  // First pass: gather the censored windows so the hand-off seeds can be
  // assigned jointly (the bottleneck serves them first-come-first-served, so
  // seeds must be nondecreasing in the order of the recorded exits).
  struct Window {
    double a = 0.0;
    double d = 0.0;
  };
  std::vector<Window> windows;
  for (const ObservedTask& rec : data.records) {
    for (std::size_t i = 1; i < rec.jobs.size(); ++i) {
      const ObservedJob& hop = rec.jobs[i];
      if (std::find(hyp.attached.begin(), hyp.attached.end(), hop.queue) != hyp.attached.end()) {
        windows.push_back(Window{hop.a, hop.d});
      }
    }
  }
  std::vector<double> split(windows.size(), 0.0);
  if (init == SplitInit::Corner) {
    for (std::size_t k = 0; k < windows.size(); ++k) {
      const double eps = std::min(1e-9, (windows[k].d - windows[k].a) / 2.0);
      split[k] = windows[k].d - eps;
    }
  } else {
    std::vector<std::size_t> order(windows.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
      if (windows[l].d != windows[r].d) return windows[l].d < windows[r].d;
      return l < r;
    });
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t k : order) {
      const double a = windows[k].a;
      const double d = windows[k].d;
      double x = 0.5 * (a + d);
      x = std::max(x, std::max(a, prev));
      x = std::min(x, d);
      if (x <= prev) x = 0.5 * (prev + d);
      x = std::min(std::max(x, a), d);
      split[k] = x;
      prev = x;
    }
  }

  double window_total = 0.0;
  int window_count = 0;
  for (int t = 0; t < static_cast<int>(data.records.size()); ++t) {
    const ObservedTask& rec = data.records[t];
    if (rec.jobs.front().queue != net.initial_queue || rec.jobs.front().a != 0.0) {
      throw std::invalid_argument("detect_missing_queue: record " + std::to_string(t) +
                                  " does not start with an entry pseudo-job");
    }
    Job head;
    head.id = static_cast<JobId>(out.log.jobs.size());
    head.task = t;
    head.queue = net.initial_queue;
    head.a = 0.0;
    head.d = rec.jobs.front().d;
    out.last_entry = std::max(out.last_entry, head.d);
    JobId prev = head.id;
    QueueId at = net.initial_queue;
    out.log.jobs.push_back(head);

    auto append = [&](QueueId queue, double a, double d, bool is_latent) {
      if (transition_logprob(net, at, queue) == kNegInf) {
        throw std::invalid_argument("detect_missing_queue: record " + std::to_string(t) +
                                    " needs transition " + std::to_string(at) + " -> " +
                                    std::to_string(queue) +
                                    " which the augmented network does not allow");
      }
      Job job;
      job.id = static_cast<JobId>(out.log.jobs.size());
      job.task = t;
      job.queue = queue;
      job.a = a;
      job.d = d;
      job.pi_pred = prev;
      out.log.jobs[prev].pi_succ = job.id;
      if (is_latent) out.latent.push_back(job.id);
      prev = job.id;
      at = queue;
      out.log.jobs.push_back(job);
    };

    for (std::size_t i = 1; i < rec.jobs.size(); ++i) {
      const ObservedJob& hop = rec.jobs[i];
      const bool attached = std::find(hyp.attached.begin(), hyp.attached.end(), hop.queue) !=
                            hyp.attached.end();
      if (attached) {
        const double x = split[window_count];
        append(hop.queue, hop.a, x, true);
        append(hyp.bottleneck, x, hop.d, false);
        window_total += hop.d - hop.a;
        ++window_count;
      } else {
        append(hop.queue, hop.a, hop.d, false);
      }
    }
    if (transition_logprob(net, at, kFinalQueue) == kNegInf) {
      throw std::invalid_argument("detect_missing_queue: record " + std::to_string(t) +
                                  " ends at queue " + std::to_string(at) +
                                  " which cannot exit the augmented network");
    }
  }
  if (window_count > 0) out.mean_window = window_total / window_count;
  return out;
}

TestResult fit_candidate(const ObservedDataset& data, const BottleneckHypothesis& hyp,
                         const SelectionConfig& cfg, std::uint64_t seed) {
  CensoredBuild build = build_censored(data, hyp, SplitInit::Mid);

  Theta theta(hyp.augmented.num_queues(), 1.0);
  const double mean_resp = mean_observed_response(data);
  if (mean_resp > 0.0) {
    for (QueueId q = 0; q < hyp.augmented.num_queues(); ++q) theta[q] = 1.0 / mean_resp;
  }
  if (build.last_entry > 0.0) {
    theta[hyp.augmented.initial_queue] =
        static_cast<double>(data.records.size()) / build.last_entry;
  }

  const double mean_window = build.mean_window;
  SamplerState state = [&] {
    try {
      return make_sampler_state(hyp.augmented, theta, std::move(build.log),
                                std::move(build.latent), derive_seed(seed, 1));
    } catch (const std::runtime_error&) {
      // The midpoint seed can violate a work queue's discipline when the
      // recorded exits are not in that queue's service order; squeezing the
      // hand-offs against the exits is feasible whenever the data are.
      CensoredBuild corner = build_censored(data, hyp, SplitInit::Corner);
      return make_sampler_state(hyp.augmented, theta, std::move(corner.log),
                                std::move(corner.latent), derive_seed(seed, 1));
    }
  }();

  SliceConfig slice = cfg.slice;
  if (!(slice.w > 0.0)) slice.w = mean_window > 0.0 ? mean_window : 1.0;

  std::vector<double> draws;
  bool collapsed = false;
  for (int t = 0; t < cfg.sweeps; ++t) {
    sweep(state, slice);
    try {
      gibbs_theta(state);
    } catch (const std::runtime_error&) {
      // The improper rate prior has a non-integrable spike where a queue's
      // total service hits zero; once the chain reaches that face (total
      // service underflows), its rate conditional is undefined. The draws so
      // far already show the collapse, so stop and test with them.
      collapsed = true;
      break;
    }
    if (t >= cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0) {
      draws.push_back(1.0 / state.theta[hyp.bottleneck]);
    }
  }
  if (collapsed && draws.size() < 2) {
    throw std::runtime_error("detect_missing_queue: candidate chain collapsed onto a "
                             "zero-total-service state before producing draws");
  }
  return bottleneck_z(draws, cfg.critical);
}

}  // namespace

DetectionOutcome detect_missing_queue(const ObservedDataset& data, const NetworkConfig& base,
                                      const std::vector<BottleneckHypothesis>& candidates,
                                      const SelectionConfig& cfg) {
  if (candidates.empty()) {
    throw std::invalid_argument("detect_missing_queue: no candidates");
  }
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.sweeps || cfg.thin <= 0) {
    throw std::invalid_argument("detect_missing_queue: need 0 <= burn_in < sweeps and thin >= 1");
  }
  if (static_cast<int>(data.records.size()) != data.total_tasks) {
    throw std::invalid_argument("detect_missing_queue: datasets with hidden tasks are not "
                                "supported; every task must carry a record");
  }
  for (const BottleneckHypothesis& hyp : candidates) {
    if (hyp.base.num_queues() != base.num_queues()) {
      throw std::invalid_argument("detect_missing_queue: candidate built against a different "
                                  "base network");
    }
  }

  DetectionOutcome out;
  out.max_z = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const TestResult r =
        fit_candidate(data, candidates[i], cfg, derive_seed(cfg.seed, i));
    out.per_candidate.push_back(r);
    out.bottleneck_detected = out.bottleneck_detected || r.reject;
    out.max_z = std::max(out.max_z, r.z);
  }
  return out;
}

}  // namespace queuenet
