#include "queuenet/experiment.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

#include "queuenet/rng.hpp"
#include "queuenet/simulate.hpp"

namespace queuenet {

NetworkConfig star_network(int work_queues) {
  if (work_queues < 1) {
    throw std::invalid_argument("star_network: need at least one work queue");
  }
  NetworkConfig net;
  net.queues.assign(work_queues + 1, QueueConfig{Discipline::Fcfs, 1});
  net.successors.resize(work_queues + 1);
  for (QueueId q = 1; q <= work_queues; ++q) {
    net.successors[0].push_back(q);
    net.successors[q] = {kFinalQueue};
  }
  net.initial_queue = 0;
  return net;
}

ObservedDataset observe_entry_work_exit(const EventLog& log, int num_queues) {
  std::vector<const Job*> heads;
  for (const Job& j : log.jobs) {
    if (j.pi_pred == kNoJob) heads.push_back(&j);
  }
  std::sort(heads.begin(), heads.end(), [](const Job* x, const Job* y) {
    if (x->d != y->d) return x->d < y->d;
    return x->id < y->id;
  });

  ObservedDataset data;
  data.scheme = ObservationScheme{1.0, 0};
  data.num_queues = num_queues;
  data.total_tasks = static_cast<int>(heads.size());
  for (std::size_t i = 0; i < heads.size(); ++i) {
    const Job* head = heads[i];
    if (head->pi_succ == kNoJob) {
      throw std::invalid_argument("observe_entry_work_exit: task " + std::to_string(head->task) +
                                  " never leaves the entry queue");
    }
    const Job* first_hop = &log.jobs[head->pi_succ];
    double exit = first_hop->d;
    for (const Job* j = first_hop; j->pi_succ != kNoJob;) {
      j = &log.jobs[j->pi_succ];
      exit = j->d;
    }
    ObservedTask rec;
    rec.task = head->task;
    rec.n0 = static_cast<int>(i) + 1;
    rec.jobs.push_back(ObservedJob{head->task, head->id, head->queue, head->a, head->d});
    rec.jobs.push_back(
        ObservedJob{head->task, first_hop->id, first_hop->queue, head->d, exit});
    data.records.push_back(std::move(rec));
  }
  return data;
}

MissingQueueReport experiment_missing_queue(const MissingQueueProtocol& protocol) {
  if (protocol.reps < 1 || protocol.tasks < 2 || !(protocol.arrival_rate > 0.0) ||
      !(protocol.work_rate > 0.0) || protocol.utilizations.empty()) {
    throw std::invalid_argument("experiment_missing_queue: malformed protocol");
  }
  const NetworkConfig base = star_network(protocol.work_queues);
  std::vector<QueueId> work_ids;
  for (QueueId q = 1; q <= protocol.work_queues; ++q) work_ids.push_back(q);
  const std::vector<BottleneckHypothesis> candidates = pair_hypotheses(base, work_ids);
  // Tasks route uniformly over the work tier, so a pair of work queues feeds
  // the shared queue at this rate; its service rate is set from the target
  // utilization.
  const double pair_rate =
      protocol.arrival_rate * 2.0 / static_cast<double>(protocol.work_queues);

  MissingQueueReport report;
  report.utilizations = protocol.utilizations;

  std::vector<std::pair<double, bool>> roc_inputs;
  std::uint64_t stream = 0;
  auto record_trial = [&](double util, bool with_bottleneck, int rep, int candidate,
                          const TestResult& r, int& wrong, int& total) {
    MissingQueueTrial trial;
    trial.utilization = util;
    trial.truth_bottleneck = with_bottleneck;
    trial.rep = rep;
    trial.candidate = candidate;
    trial.z = r.z;
    trial.reject = r.reject;
    trial.correct = r.reject == with_bottleneck;
    report.trials.push_back(trial);
    roc_inputs.emplace_back(r.z, with_bottleneck);
    ++total;
    wrong += trial.correct ? 0 : 1;
  };

  for (double util : protocol.utilizations) {
    if (!(util > 0.0)) {
      throw std::invalid_argument("experiment_missing_queue: utilization must be positive");
    }
    int wrong = 0;
    int total = 0;
    for (int rep = 0; rep < protocol.reps; ++rep) {
      // Null arm: one plain-star dataset, every candidate tested on it.
      {
        Rng rng(derive_seed(protocol.fit.seed, stream++));
        Theta theta(base.num_queues(), protocol.work_rate);
        theta[0] = protocol.arrival_rate;
        const EventLog log = simulate_network(
            base, theta, ArrivalSpec::poisson(protocol.arrival_rate), protocol.tasks, rng);
        const ObservedDataset data = observe_entry_work_exit(log, base.num_queues());

        SelectionConfig cfg = protocol.fit;
        cfg.seed = derive_seed(protocol.fit.seed, stream++);
        const DetectionOutcome outcome = detect_missing_queue(data, base, candidates, cfg);
        for (std::size_t ci = 0; ci < outcome.per_candidate.size(); ++ci) {
          record_trial(util, false, rep, static_cast<int>(ci), outcome.per_candidate[ci], wrong,
                       total);
        }
      }
      // Loaded arm: per candidate, a dataset from that candidate's own
      // bottlenecked topology, tested against the matching hypothesis.
      for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        const BottleneckHypothesis& hyp = candidates[ci];
        Rng rng(derive_seed(protocol.fit.seed, stream++));
        Theta theta(hyp.augmented.num_queues(), protocol.work_rate);
        theta[0] = protocol.arrival_rate;
        theta[hyp.bottleneck] = pair_rate / util;
        const EventLog log = simulate_network(
            hyp.augmented, theta, ArrivalSpec::poisson(protocol.arrival_rate), protocol.tasks,
            rng);
        const ObservedDataset data = observe_entry_work_exit(log, base.num_queues());

        SelectionConfig cfg = protocol.fit;
        cfg.seed = derive_seed(protocol.fit.seed, stream++);
        const DetectionOutcome outcome = detect_missing_queue(data, base, {hyp}, cfg);
        record_trial(util, true, rep, static_cast<int>(ci), outcome.per_candidate[0], wrong,
                     total);
      }
    }
    report.error_by_utilization.push_back(static_cast<double>(wrong) / total);
  }
  report.auc = roc_auc(roc_inputs);
  return report;
}

void write_missing_queue_trials_csv(const MissingQueueReport& report, std::ostream& out) {
  out << "utilization,truth_bottleneck,rep,candidate,z,reject,correct\n";
  for (const MissingQueueTrial& t : report.trials) {
    out << t.utilization << ',' << (t.truth_bottleneck ? 1 : 0) << ',' << t.rep << ','
        << t.candidate << ',' << t.z << ',' << (t.reject ? 1 : 0) << ',' << (t.correct ? 1 : 0)
        << '\n';
  }
}

void write_missing_queue_summary_csv(const MissingQueueReport& report, std::ostream& out) {
  out << "utilization,error\n";
  for (std::size_t i = 0; i < report.utilizations.size(); ++i) {
    out << report.utilizations[i] << ',' << report.error_by_utilization[i] << '\n';
  }
  out << "auc," << report.auc << '\n';
}

}  // namespace queuenet
