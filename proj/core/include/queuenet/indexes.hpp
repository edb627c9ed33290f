#pragma once

#include <vector>

#include "queuenet/treap.hpp"
#include "queuenet/types.hpp"

namespace queuenet {

// Per-queue event treaps. Satellites pair each event with the other endpoint
// of its job's presence interval so neighbor/overlap queries return both.
struct QueueTreaps {
  TimeTreap arrivals;       // key a, satellite d
  TimeTreap departures;     // key d, satellite a
  TimeTreap commencements;  // key u, satellite d; maintained for RSS queues only
};

// Event-time indexes for every queue of a network, kept in sync with an
// EventLog under single-job edits.
class EventIndex {
 public:
  void clear();
  void build(const NetworkConfig& net, const EventLog& log);
  bool built() const { return !queues_.empty(); }
  int num_queues() const { return static_cast<int>(queues_.size()); }

  const QueueTreaps& queue(QueueId q) const { return queues_[q]; }
  bool tracks_commencements(QueueId q) const { return rss_[q] != 0; }

  void insert_job(const Job& job);
  void erase_job(const Job& job);
  // Applies the treap edits implied by the field differences between the two
  // snapshots of one job (same id, same queue).
  void update_job(const Job& before, const Job& after);

  // Jobs present at time t: #{a < t} - #{d < t}. A job departing exactly at t
  // still counts; a job arriving exactly at t does not.
  int count_in_system(QueueId q, double t) const;

  // RSS only: jobs whose service commenced strictly inside (lo, hi).
  std::vector<TimeTreap::Entry> commencements_in(QueueId q, double lo, double hi) const;

 private:
  std::vector<QueueTreaps> queues_;
  std::vector<char> rss_;
};

// Presence intervals [a, d] of jobs at PS queues, keyed by arrival with the
// departure as satellite, supporting overlap queries.
class IntervalIndex {
 public:
  void clear();
  void build(const NetworkConfig& net, const EventLog& log);
  bool built() const { return !queues_.empty(); }
  bool tracked(QueueId q) const { return tracked_[q] != 0; }
  const TimeTreap& queue(QueueId q) const { return queues_[q]; }

  void insert_job(const Job& job);
  void erase_job(const Job& job);
  void update_job(const Job& before, const Job& after);

  // Jobs whose presence interval touches [lo, hi]: a <= hi and d >= lo.
  // Touching at a single point counts.
  std::vector<TimeTreap::Entry> intersecting(QueueId q, double lo, double hi) const;

 private:
  std::vector<char> tracked_;
  std::vector<TimeTreap> queues_;
};

// Number of jobs in the queue at the instant `job` begins service, counting
// the job itself: 1 + #{other jobs with a < u and d > u}. Jobs that depart
// exactly at u (in particular the departure that triggered this commencement)
// are not counted; neither are jobs arriving exactly at u.
int rss_nq(const EventIndex& index, const Job& job);

// Number of jobs sharing the processor just before `job` departs (at least 1).
int ps_crowd(const EventIndex& index, const Job& job);

}  // namespace queuenet
