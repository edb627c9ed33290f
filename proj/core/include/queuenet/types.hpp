#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace queuenet {

using QueueId = std::int32_t;
using TaskId = std::int32_t;
using JobId = std::int32_t;

// Pseudo-queue id marking the exit of the network in successor lists.
inline constexpr QueueId kFinalQueue = -1;
inline constexpr JobId kNoJob = -1;

enum class Discipline { Fcfs, Rss, Ps };

std::string to_string(Discipline d);
bool discipline_from_string(const std::string& text, Discipline& out);

struct QueueConfig {
  Discipline discipline = Discipline::Fcfs;
  int processors = 1;  // K; must be 1 unless discipline == Fcfs
};

// A queueing network. Queues carry dense ids 0..num_queues()-1. Tasks enter
// the system through `initial_queue` (q0), which models the arrival process:
// every task owns one job there, arriving at time 0, whose service time is the
// interarrival gap and whose departure is the task's entry into the rest of
// the network. q0 must be FCFS with a single processor and must have no
// incoming edges.
struct NetworkConfig {
  std::vector<QueueConfig> queues;
  std::vector<std::vector<QueueId>> successors;  // kFinalQueue marks exit
  QueueId initial_queue = 0;
  int max_path_length = 0;  // 0 selects the default of 10 * num_queues()

  int num_queues() const { return static_cast<int>(queues.size()); }
  int effective_max_path_length() const {
    return max_path_length > 0 ? max_path_length : 10 * num_queues();
  }
};

// Per-queue exponential service rates, indexed by queue id. theta[q0] is the
// arrival-process rate.
using Theta = std::vector<double>;

// Returns human-readable structural problems; empty means valid.
std::vector<std::string> validate_network(const NetworkConfig& net);

// State of the K-processor FCFS recursion at a job, captured immediately
// before the job's own assignment takes effect.
struct FcfsAux {
  int proc = -1;             // processor the job is assigned to
  double min_clear = 0.0;    // earliest clear time across processors
  std::vector<double> clear; // per-processor clear times before this job
};

struct RssAux {
  JobId gamma_pred = kNoJob; // previous departure from the same queue
  int nq = 1;                // jobs in the queue when this job begins service
};

// One visit of a task to one queue.
struct Job {
  JobId id = kNoJob;
  TaskId task = -1;
  QueueId queue = 0;
  double a = 0.0;  // arrival time
  double d = 0.0;  // departure time
  double s = 0.0;  // service time
  double u = 0.0;  // commencement time
  JobId pi_pred = kNoJob;   // previous job of the same task
  JobId pi_succ = kNoJob;   // next job of the same task
  JobId rho_pred = kNoJob;  // previous arrival at the same queue (FCFS only)
  FcfsAux fcfs;
  RssAux rss;
};

struct EventLog {
  std::vector<Job> jobs;  // index == JobId
  int num_queues = 0;
  int num_tasks = 0;
};

struct ResponseDecomposition {
  double waiting = 0.0;
  double service = 0.0;
  double response = 0.0;  // always waiting + service, bit for bit
};

ResponseDecomposition decompose_response(const Job& job);

}  // namespace queuenet
