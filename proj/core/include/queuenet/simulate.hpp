#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "queuenet/rng.hpp"
#include "queuenet/types.hpp"

namespace queuenet {

// --- Per-queue departure-time solvers (forward direction) ------------------
//
// All solvers take arrivals sorted ascending (ties allowed; position in the
// input vector is the tiebreaker) and nonnegative service times, and return
// one entry per input job in input order.

struct FcfsSolution {
  std::vector<double> d;
  std::vector<double> u;
  std::vector<int> proc;
  std::vector<double> min_clear;
  std::vector<std::vector<double>> clear;  // per-processor clear times before each job
};

FcfsSolution solve_fcfs(int processors, const std::vector<double>& arrivals,
                        const std::vector<double>& services);

// Picks which waiting job commences next: receives the waiting jobs' input
// indices (ascending) and returns a position into that vector.
using RssSelector = std::function<std::size_t(const std::vector<std::size_t>& waiting)>;

RssSelector uniform_rss_selector(Rng& rng);

struct RssSolution {
  std::vector<double> d;
  std::vector<double> u;
  std::vector<int> gamma;  // input index of the previous departure, or -1
  std::vector<int> nq;
};

RssSolution solve_rss(const std::vector<double>& arrivals,
                      const std::vector<double>& services, const RssSelector& select);

inline constexpr double kPsTolerance = 1e-10;
inline constexpr int kPsMaxIterations = 10000;

std::vector<double> solve_ps(const std::vector<double>& arrivals,
                             const std::vector<double>& services,
                             double tol = kPsTolerance, int max_iter = kPsMaxIterations);

// Discrete-time PS reference: advances in fixed slices of length ts, giving
// each present job ts/N(t) of service per slice. Converges to solve_ps as
// ts -> 0; kept as an independent cross-check.
std::vector<double> discrete_time_ps(const std::vector<double>& arrivals,
                                     const std::vector<double>& services, double ts);

// --- Per-queue inversion (times -> services) -------------------------------

struct QueueRecovery {
  bool feasible = true;
  std::string error;  // set when !feasible, names the offending position
  std::vector<double> s;
  std::vector<double> u;
  // FCFS auxiliaries (empty otherwise)
  std::vector<int> proc;
  std::vector<double> min_clear;
  std::vector<std::vector<double>> clear;
  // RSS auxiliaries (empty otherwise)
  std::vector<int> gamma;
  std::vector<int> nq;
};

// Inputs are paired (a[i], d[i]) in arrival order (a sorted ascending).
QueueRecovery recover_fcfs(int processors, const std::vector<double>& arrivals,
                           const std::vector<double>& departures);
QueueRecovery recover_rss(const std::vector<double>& arrivals,
                          const std::vector<double>& departures);
QueueRecovery recover_ps(const std::vector<double>& arrivals,
                         const std::vector<double>& departures);

// --- Whole-log inversion ---------------------------------------------------

// Recomputes s, u, rho/gamma links and discipline auxiliaries for every job
// from (a, d, queue, task links) alone. Throws std::runtime_error naming the
// violating job when the times are not realizable under the disciplines.
void recover_services(const NetworkConfig& net, EventLog& log);
bool try_recover_services(const NetworkConfig& net, EventLog& log,
                          std::string* error = nullptr);

// --- Network-level forward simulation --------------------------------------

struct ArrivalSpec {
  enum class Kind { Poisson, ExplicitTimes, PiecewiseRate };
  Kind kind = Kind::Poisson;
  double rate = 1.0;                // Poisson
  std::vector<double> times;        // ExplicitTimes, nondecreasing
  std::vector<double> breakpoints;  // PiecewiseRate: rates[i] applies on
  std::vector<double> rates;        //   [breakpoints[i], breakpoints[i+1]); last extends

  static ArrivalSpec poisson(double rate);
  static ArrivalSpec explicit_times(std::vector<double> times);
  static ArrivalSpec piecewise(std::vector<double> breakpoints, std::vector<double> rates);
};

// Task entry times (the q0 departures) for n tasks.
std::vector<double> sample_entries(const ArrivalSpec& spec, int n, Rng& rng);

// Queue sequence of one task after q0, ending when the exit is drawn.
// Throws if the path-length guard is exceeded.
std::vector<QueueId> sample_path(const NetworkConfig& net, Rng& rng);

// Fully explicit simulation inputs: entry times per task, path per task
// (excluding q0), service time per hop per task.
struct SimInputs {
  std::vector<double> entries;
  std::vector<std::vector<QueueId>> paths;
  std::vector<std::vector<double>> services;
};

// Solves the coupled cross-queue system chronologically. RSS queues draw
// selections from `rng` unless a scripted selector is supplied for them.
EventLog simulate_network(const NetworkConfig& net, const SimInputs& inputs, Rng& rng,
                          const std::map<QueueId, RssSelector>& selectors = {});

// Draws entries, paths and exponential services from theta, then solves.
EventLog simulate_network(const NetworkConfig& net, const Theta& theta,
                          const ArrivalSpec& arrivals, int num_tasks, Rng& rng,
                          const std::map<QueueId, RssSelector>& selectors = {});

// Mean of d_last - a_first over tasks (task response time).
double mean_task_response(const EventLog& log);

}  // namespace queuenet
