#include "queuenet/indexes.hpp"

#include <algorithm>
#include <stdexcept>

namespace queuenet {

void EventIndex::clear() {
  queues_.clear();
  rss_.clear();
}

void EventIndex::build(const NetworkConfig& net, const EventLog& log) {
  clear();
  queues_.resize(net.num_queues());
  rss_.resize(net.num_queues(), 0);
  for (int q = 0; q < net.num_queues(); ++q) {
    rss_[q] = net.queues[q].discipline == Discipline::Rss ? 1 : 0;
  }
  for (const Job& job : log.jobs) insert_job(job);
}

void EventIndex::insert_job(const Job& job) {
  QueueTreaps& t = queues_[job.queue];
  t.arrivals.insert(job.a, job.id, job.d);
  t.departures.insert(job.d, job.id, job.a);
  if (rss_[job.queue]) t.commencements.insert(job.u, job.id, job.d);
}

void EventIndex::erase_job(const Job& job) {
  QueueTreaps& t = queues_[job.queue];
  t.arrivals.erase(job.a, job.id);
  t.departures.erase(job.d, job.id);
  if (rss_[job.queue]) t.commencements.erase(job.u, job.id);
}

void EventIndex::update_job(const Job& before, const Job& after) {
  if (before.id != after.id || before.queue != after.queue) {
    throw std::logic_error("update_job: id and queue must be unchanged");
  }
  QueueTreaps& t = queues_[after.queue];
  const bool a_changed = before.a != after.a;
  const bool d_changed = before.d != after.d;
  if (a_changed) {
    t.arrivals.erase(before.a, before.id);
    t.arrivals.insert(after.a, after.id, after.d);
  } else if (d_changed) {
    t.arrivals.update_satellite(after.a, after.id, after.d);
  }
  if (d_changed) {
    t.departures.erase(before.d, before.id);
    t.departures.insert(after.d, after.id, after.a);
  } else if (a_changed) {
    t.departures.update_satellite(after.d, after.id, after.a);
  }
  if (rss_[after.queue]) {
    if (before.u != after.u) {
      t.commencements.erase(before.u, before.id);
      t.commencements.insert(after.u, after.id, after.d);
    } else if (d_changed) {
      t.commencements.update_satellite(after.u, after.id, after.d);
    }
  }
}

int EventIndex::count_in_system(QueueId q, double t) const {
  const QueueTreaps& treaps = queues_[q];
  return treaps.arrivals.count_less(t) - treaps.departures.count_less(t);
}

std::vector<TimeTreap::Entry> EventIndex::commencements_in(QueueId q, double lo,
                                                           double hi) const {
  std::vector<TimeTreap::Entry> out;
  queues_[q].commencements.collect_range(lo, hi, /*closed=*/false, out);
  return out;
}

void IntervalIndex::clear() {
  tracked_.clear();
  queues_.clear();
}

void IntervalIndex::build(const NetworkConfig& net, const EventLog& log) {
  clear();
  tracked_.resize(net.num_queues(), 0);
  queues_.resize(net.num_queues());
  for (int q = 0; q < net.num_queues(); ++q) {
    tracked_[q] = net.queues[q].discipline == Discipline::Ps ? 1 : 0;
  }
  for (const Job& job : log.jobs) insert_job(job);
}

void IntervalIndex::insert_job(const Job& job) {
  if (!tracked_[job.queue]) return;
  queues_[job.queue].insert(job.a, job.id, job.d);
}

void IntervalIndex::erase_job(const Job& job) {
  if (!tracked_[job.queue]) return;
  queues_[job.queue].erase(job.a, job.id);
}

void IntervalIndex::update_job(const Job& before, const Job& after) {
  if (before.id != after.id || before.queue != after.queue) {
    throw std::logic_error("update_job: id and queue must be unchanged");
  }
  if (!tracked_[after.queue]) return;
  TimeTreap& t = queues_[after.queue];
  if (before.a != after.a) {
    t.erase(before.a, before.id);
    t.insert(after.a, after.id, after.d);
  } else if (before.d != after.d) {
    t.update_satellite(after.a, after.id, after.d);
  }
}

std::vector<TimeTreap::Entry> IntervalIndex::intersecting(QueueId q, double lo,
                                                          double hi) const {
  std::vector<TimeTreap::Entry> out;
  queues_[q].collect_overlapping(lo, hi, /*key_closed=*/true, /*sat_closed=*/true, out);
  return out;
}

int rss_nq(const EventIndex& index, const Job& job) {
  const QueueTreaps& t = index.queue(job.queue);
  const int others =
      t.arrivals.count_less(job.u) - t.departures.count_less_equal(job.u);
  const int present = (job.a < job.u && job.d > job.u) ? 1 : 0;
  return 1 + std::max(0, others - present);
}

int ps_crowd(const EventIndex& index, const Job& job) {
  int n = index.count_in_system(job.queue, job.d);
  if (job.a == job.d) ++n;  // zero-length presence: the count above misses the job itself
  return std::max(1, n);
}

}  // namespace queuenet
