#include "queuenet/observe.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace queuenet {

namespace {

// Chain heads (pi_pred == kNoJob) are the entry pseudo-jobs; their departure
// is the task's entry into the network.
std::vector<JobId> heads_by_entry(const EventLog& log) {
  std::vector<JobId> heads;
  for (const Job& job : log.jobs) {
    if (job.pi_pred == kNoJob) heads.push_back(job.id);
  }
  std::sort(heads.begin(), heads.end(), [&](JobId x, JobId y) {
    const Job& jx = log.jobs[x];
    const Job& jy = log.jobs[y];
    if (jx.d != jy.d) return jx.d < jy.d;
    return jx.id < jy.id;
  });
  return heads;
}

}  // namespace

ObservedDataset observe(const EventLog& log, const ObservationScheme& scheme) {
  if (!(scheme.p >= 0.0 && scheme.p <= 1.0)) {
    throw std::invalid_argument("observe: p must lie in [0, 1]");
  }
  ObservedDataset data;
  data.scheme = scheme;
  data.num_queues = log.num_queues;
  data.total_tasks = log.num_tasks;

  const std::vector<JobId> heads = heads_by_entry(log);
  Rng rng(scheme.seed);
  int entered = 0;
  for (JobId head : heads) {
    ++entered;
    if (!rng.bernoulli(scheme.p)) continue;
    ObservedTask rec;
    rec.task = log.jobs[head].task;
    rec.n0 = entered;
    for (JobId id = head; id != kNoJob; id = log.jobs[id].pi_succ) {
      const Job& job = log.jobs[id];
      rec.jobs.push_back(ObservedJob{job.task, job.id, job.queue, job.a, job.d});
    }
    data.records.push_back(std::move(rec));
  }
  return data;
}

double mean_observed_response(const ObservedDataset& data) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const ObservedTask& rec : data.records) {
    for (std::size_t i = 1; i < rec.jobs.size(); ++i) {
      sum += rec.jobs[i].d - rec.jobs[i].a;
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

std::vector<std::string> validate_dataset(const ObservedDataset& data) {
  std::vector<std::string> errors;
  if (!(data.scheme.p >= 0.0 && data.scheme.p <= 1.0)) {
    errors.push_back("observation probability outside [0, 1]");
  }
  if (data.total_tasks < static_cast<int>(data.records.size())) {
    errors.push_back("more records than total tasks");
  }
  int prev_n0 = 0;
  double prev_entry = -1.0;
  for (std::size_t r = 0; r < data.records.size(); ++r) {
    const ObservedTask& rec = data.records[r];
    const std::string where = "record " + std::to_string(r);
    if (rec.jobs.empty()) {
      errors.push_back(where + ": no jobs");
      continue;
    }
    if (rec.n0 <= prev_n0) errors.push_back(where + ": counter not increasing");
    if (rec.n0 > data.total_tasks) errors.push_back(where + ": counter exceeds total tasks");
    prev_n0 = rec.n0;
    const double entry = rec.jobs.front().d;
    if (entry < prev_entry) errors.push_back(where + ": entries out of order");
    prev_entry = entry;
    for (std::size_t i = 0; i < rec.jobs.size(); ++i) {
      const ObservedJob& job = rec.jobs[i];
      if (job.queue < 0 || job.queue >= data.num_queues) {
        errors.push_back(where + ": job queue out of range");
      }
      if (!(job.d >= job.a)) errors.push_back(where + ": job departs before it arrives");
      if (i > 0 && job.a != rec.jobs[i - 1].d) {
        errors.push_back(where + ": chain times disagree between hops");
      }
    }
  }
  return errors;
}

}  // namespace queuenet
