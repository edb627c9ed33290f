#include "queuenet/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "queuenet/likelihood.hpp"
#include "queuenet/propagate.hpp"
#include "queuenet/simulate.hpp"

namespace queuenet {

namespace {

double eval_delta(SamplerState& state, JobId e, double x) {
  return propose_departure_change(state, e, x).delta;
}

// Retraces the doubling path from the bracket down to width ~w. The candidate
// is rejected if, once its path separates from the current point's, it ever
// sits in an interval whose both halves lie outside the slice — such a point
// could not have produced the same bracket in reverse.
bool doubling_acceptable(SamplerState& state, JobId e, double x0, double x1, double level,
                         double lo, double hi, double w, int* evals) {
  bool differ = false;
  while (hi - lo > 1.1 * w) {
    const double mid = 0.5 * (lo + hi);
    if ((x0 < mid && x1 >= mid) || (x0 >= mid && x1 < mid)) differ = true;
    if (x1 < mid) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (differ) {
      *evals += 2;
      if (eval_delta(state, e, lo) <= level && eval_delta(state, e, hi) <= level) return false;
    }
  }
  return true;
}

}  // namespace

SliceStats slice_update_departure(SamplerState& state, JobId e, const SliceConfig& cfg) {
  if (e < 0 || static_cast<std::size_t>(e) >= state.log.jobs.size() || !state.is_latent[e]) {
    throw std::invalid_argument("slice_update_departure: job " + std::to_string(e) +
                                " is not a latent departure");
  }
  if (!(cfg.w > 0.0)) {
    throw std::invalid_argument("slice_update_departure: bracket width must be > 0");
  }
  if (cfg.max_step_out < 0 || cfg.max_shrink < 1) {
    throw std::invalid_argument("slice_update_departure: nonsensical bracket limits");
  }

  SliceStats stats;
  const double x0 = state.log.jobs[e].d;
  // Vertical move in log space; the current point has relative density 0, so
  // it always lies strictly inside the slice.
  const double level = -state.rng.exponential(1.0);

  double lo = x0 - cfg.w * state.rng.uniform();
  double hi = lo + cfg.w;
  double dlo = eval_delta(state, e, lo);
  double dhi = eval_delta(state, e, hi);
  stats.evals += 2;
  int budget = cfg.max_step_out;
  while (budget-- > 0 && (dlo > level || dhi > level)) {
    if (state.rng.uniform() < 0.5) {
      lo -= (hi - lo);
      dlo = eval_delta(state, e, lo);
    } else {
      hi += (hi - lo);
      dhi = eval_delta(state, e, hi);
    }
    ++stats.evals;
  }

  double shrink_lo = lo;
  double shrink_hi = hi;
  for (int i = 0; i < cfg.max_shrink; ++i) {
    const double x1 = state.rng.uniform(shrink_lo, shrink_hi);
    StagedUpdate upd = propose_departure_change(state, e, x1);
    ++stats.evals;
    if (upd.feasible && upd.delta > level &&
        doubling_acceptable(state, e, x0, x1, level, lo, hi, cfg.w, &stats.evals)) {
      apply_update(state, upd);
      stats.moved = x1 != x0;
      return stats;
    }
    if (x1 < x0) {
      shrink_lo = x1;
    } else {
      shrink_hi = x1;
    }
  }
  stats.stuck = true;  // kept the current value; still a valid kernel step
  return stats;
}

SweepStats sweep(SamplerState& state, const SliceConfig& cfg) {
  SweepStats stats;
  std::vector<JobId> order = state.latent;
  std::sort(order.begin(), order.end(), [&](JobId x, JobId y) {
    const double dx = state.log.jobs[x].d;
    const double dy = state.log.jobs[y].d;
    if (dx != dy) return dx < dy;
    return x < y;
  });
  for (JobId e : order) {
    const SliceStats s = slice_update_departure(state, e, cfg);
    stats.moved += s.moved ? 1 : 0;
    stats.stuck += s.stuck ? 1 : 0;
    stats.evals += s.evals;
  }
  return stats;
}

namespace {

struct QueueTotals {
  std::vector<int> n;
  std::vector<double> s;
};

QueueTotals totals_by_queue(const SamplerState& state) {
  QueueTotals t;
  t.n.assign(state.net.num_queues(), 0);
  t.s.assign(state.net.num_queues(), 0.0);
  for (const Job& job : state.log.jobs) {
    ++t.n[job.queue];
    t.s[job.queue] += job.s;
  }
  return t;
}

// The log density depends on theta only through the per-queue service terms
// sum_q (n_q log theta_q - theta_q S_q), so a rate change adjusts it in
// closed form. Any staged updates become stale (version bump).
void set_theta(SamplerState& state, const Theta& next, const QueueTotals& t) {
  double adjust = 0.0;
  for (QueueId q = 0; q < state.net.num_queues(); ++q) {
    adjust += t.n[q] * (std::log(next[q]) - std::log(state.theta[q])) -
              (next[q] - state.theta[q]) * t.s[q];
  }
  state.theta = next;
  state.log_density += adjust;
  ++state.version;
}

}  // namespace

void gibbs_theta(SamplerState& state, const GammaPrior& prior) {
  if (!(prior.shape >= 0.0) || !(prior.rate >= 0.0)) {
    throw std::invalid_argument("gibbs_theta: prior shape and rate must be >= 0");
  }
  const QueueTotals t = totals_by_queue(state);
  Theta next(state.net.num_queues());
  for (QueueId q = 0; q < state.net.num_queues(); ++q) {
    const double shape = prior.shape + t.n[q];
    const double rate = prior.rate + t.s[q];
    if (!(shape > 0.0) || !(rate > 0.0)) {
      throw std::runtime_error("gibbs_theta: improper conditional for queue " + std::to_string(q) +
                               " (no jobs, or zero total service); provide data covering the "
                               "queue or use a proper prior");
    }
    next[q] = state.rng.gamma(shape, rate);
  }
  set_theta(state, next, t);
}

void ml_theta_step(SamplerState& state) {
  const QueueTotals t = totals_by_queue(state);
  Theta next(state.net.num_queues());
  for (QueueId q = 0; q < state.net.num_queues(); ++q) {
    if (t.n[q] == 0 || !(t.s[q] > 0.0)) {
      throw std::runtime_error("ml_theta_step: queue " + std::to_string(q) +
                               " has no jobs or zero total service; the rate estimate is "
                               "undefined");
    }
    next[q] = static_cast<double>(t.n[q]) / t.s[q];
  }
  set_theta(state, next, t);
}

namespace {

struct TaskDraft {
  bool hidden = false;
  double entry = 0.0;
  std::vector<QueueId> path;  // queues after the entry queue
  std::vector<double> arr;    // arr[0] == entry
  std::vector<double> dep;
};

std::vector<int> entry_order(const std::vector<TaskDraft>& drafts) {
  std::vector<int> order(drafts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return drafts[x].entry < drafts[y].entry; });
  return order;
}

EventLog assemble(const NetworkConfig& net, const std::vector<TaskDraft>& drafts,
                  const std::vector<int>& order) {
  EventLog log;
  log.num_queues = net.num_queues();
  log.num_tasks = static_cast<int>(order.size());
  for (int t = 0; t < static_cast<int>(order.size()); ++t) {
    const TaskDraft& draft = drafts[order[t]];
    Job head;
    head.id = static_cast<JobId>(log.jobs.size());
    head.task = t;
    head.queue = net.initial_queue;
    head.a = 0.0;
    head.d = draft.entry;
    JobId prev = head.id;
    log.jobs.push_back(head);
    for (std::size_t h = 0; h < draft.path.size(); ++h) {
      Job job;
      job.id = static_cast<JobId>(log.jobs.size());
      job.task = t;
      job.queue = draft.path[h];
      job.a = draft.arr[h];
      job.d = draft.dep[h];
      job.pi_pred = prev;
      log.jobs[prev].pi_succ = job.id;
      prev = job.id;
      log.jobs.push_back(job);
    }
  }
  return log;
}

bool drafts_feasible(const NetworkConfig& net, const std::vector<TaskDraft>& drafts,
                     std::string* error = nullptr) {
  EventLog log = assemble(net, drafts, entry_order(drafts));
  return try_recover_services(net, log, error);
}

// Departure time that gives an inserted job (approximately) zero service
// given the fixed (a, d) intervals already at the queue.
double zero_service_departure(const QueueConfig& queue,
                              const std::vector<std::pair<double, double>>& occ, double a) {
  switch (queue.discipline) {
    case Discipline::Ps:
      return a;
    case Discipline::Rss: {
      // If the server is busy, ride the first completion after a; depart just
      // afterwards so the displaced selection keeps a positive service slot.
      double completion = std::numeric_limits<double>::infinity();
      for (const auto& [aj, dj] : occ) {
        if (aj <= a && dj > a) completion = std::min(completion, dj);
      }
      if (!std::isfinite(completion)) return a;
      double next_event = std::numeric_limits<double>::infinity();
      for (const auto& [aj, dj] : occ) {
        if (aj > completion) next_event = std::min(next_event, aj);
        if (dj > completion) next_event = std::min(next_event, dj);
      }
      const double room = std::isfinite(next_event) ? (next_event - completion) / 2 : 1e-9;
      return completion + std::min(1e-9, room);
    }
    case Discipline::Fcfs: {
      std::vector<std::pair<double, double>> sorted = occ;
      std::sort(sorted.begin(), sorted.end());
      std::vector<double> clear(queue.processors, 0.0);
      for (const auto& [aj, dj] : sorted) {
        if (aj > a) break;
        // Each prior arrival in turn takes the earliest-clear processor.
        auto slot = std::min_element(clear.begin(), clear.end());
        *slot = dj;
      }
      return std::max(a, *std::min_element(clear.begin(), clear.end()));
    }
  }
  return a;
}

SliceConfig resolve_slice(const PosteriorConfig& cfg, const ObservedDataset& data) {
  SliceConfig slice = cfg.slice;
  if (!(slice.w > 0.0)) {
    const double mean = mean_observed_response(data);
    slice.w = mean > 0.0 ? mean : 1.0;
  }
  return slice;
}

}  // namespace

SamplerState initialize_state(const ObservedDataset& data, const NetworkConfig& net,
                              const PosteriorConfig& cfg) {
  {
    const std::vector<std::string> net_errors = validate_network(net);
    if (!net_errors.empty()) {
      throw std::invalid_argument("initialize_state: invalid network: " + net_errors.front());
    }
    const std::vector<std::string> data_errors = validate_dataset(data);
    if (!data_errors.empty()) {
      throw std::invalid_argument("initialize_state: invalid dataset: " + data_errors.front());
    }
    if (data.num_queues != net.num_queues()) {
      throw std::invalid_argument("initialize_state: dataset has " +
                                  std::to_string(data.num_queues) + " queues, network has " +
                                  std::to_string(net.num_queues()));
    }
  }

  // Observed tasks become fixed drafts; their paths must be routable.
  std::vector<TaskDraft> drafts;
  drafts.reserve(data.records.size());
  for (std::size_t r = 0; r < data.records.size(); ++r) {
    const ObservedTask& rec = data.records[r];
    if (rec.jobs.front().queue != net.initial_queue || rec.jobs.front().a != 0.0) {
      throw std::invalid_argument("initialize_state: record " + std::to_string(r) +
                                  " does not start with an entry pseudo-job");
    }
    TaskDraft draft;
    draft.entry = rec.jobs.front().d;
    QueueId at = net.initial_queue;
    for (std::size_t i = 1; i < rec.jobs.size(); ++i) {
      const ObservedJob& job = rec.jobs[i];
      if (transition_logprob(net, at, job.queue) == kNegInf) {
        throw std::invalid_argument("initialize_state: record " + std::to_string(r) +
                                    " uses transition " + std::to_string(at) + " -> " +
                                    std::to_string(job.queue) +
                                    " which the network does not allow");
      }
      draft.path.push_back(job.queue);
      draft.arr.push_back(job.a);
      draft.dep.push_back(job.d);
      at = job.queue;
    }
    if (transition_logprob(net, at, kFinalQueue) == kNegInf) {
      throw std::invalid_argument("initialize_state: record " + std::to_string(r) +
                                  " ends at queue " + std::to_string(at) +
                                  " which cannot exit the network");
    }
    drafts.push_back(std::move(draft));
  }
  {
    std::string error;
    if (!drafts_feasible(net, drafts, &error)) {
      throw std::runtime_error("initialize_state: observed data is infeasible under the "
                               "declared network: " +
                               error);
    }
  }

  Rng place_rng(derive_seed(cfg.seed, 0));
  const double mean_response = mean_observed_response(data);
  const double service_rate = mean_response > 0.0 ? 1.0 / mean_response : 1.0;
  double entry_rate = 1.0;
  if (!data.records.empty() && data.records.back().jobs.front().d > 0.0) {
    entry_rate = static_cast<double>(data.total_tasks) / data.records.back().jobs.front().d;
  }

  // Hidden entry times live strictly inside the counter gaps: the id order of
  // the entry queue then enforces the recorded counts for good.
  struct Gap {
    double lo, hi;  // hi < 0 means open-ended
    int count;
  };
  std::vector<Gap> gaps;
  int seen = 0;
  double prev_entry = 0.0;
  for (const ObservedTask& rec : data.records) {
    const int hidden_before = rec.n0 - seen - 1;
    if (hidden_before < 0) {
      throw std::invalid_argument("initialize_state: entry counter decreases");
    }
    if (hidden_before > 0) gaps.push_back(Gap{prev_entry, rec.jobs.front().d, hidden_before});
    seen = rec.n0;
    prev_entry = rec.jobs.front().d;
  }
  if (data.total_tasks > seen) {
    gaps.push_back(Gap{prev_entry, -1.0, data.total_tasks - seen});
  }

  for (const Gap& gap : gaps) {
    std::vector<double> entries;
    if (gap.hi >= 0.0) {
      for (int i = 0; i < gap.count; ++i) entries.push_back(place_rng.uniform(gap.lo, gap.hi));
    } else {
      double at = gap.lo;
      for (int i = 0; i < gap.count; ++i) {
        at += place_rng.exponential(entry_rate);
        entries.push_back(at);
      }
    }
    std::sort(entries.begin(), entries.end());

    for (double first_entry : entries) {
      bool placed = false;
      for (int attempt = 0; attempt < 20 && !placed; ++attempt) {
        const double entry = attempt == 0 ? first_entry
                             : gap.hi >= 0.0
                                 ? place_rng.uniform(gap.lo, gap.hi)
                                 : gap.lo + place_rng.exponential(entry_rate);
        TaskDraft draft;
        draft.hidden = true;
        draft.entry = entry;
        draft.path = sample_path(net, place_rng);
        double at = entry;
        for (QueueId q : draft.path) {
          (void)q;
          const double s = place_rng.exponential(service_rate);
          draft.arr.push_back(at);
          draft.dep.push_back(at + s);
          at += s;
        }
        drafts.push_back(draft);
        if (drafts_feasible(net, drafts)) {
          placed = true;
        } else {
          drafts.pop_back();
        }
      }
      // Rejection failed: ride the existing schedule with zero service.
      for (int attempt = 0; attempt < 20 && !placed; ++attempt) {
        const double entry = attempt == 0 ? first_entry
                             : gap.hi >= 0.0
                                 ? place_rng.uniform(gap.lo, gap.hi)
                                 : gap.lo + place_rng.exponential(entry_rate);
        TaskDraft draft;
        draft.hidden = true;
        draft.entry = entry;
        draft.path = sample_path(net, place_rng);
        double at = entry;
        for (QueueId q : draft.path) {
          std::vector<std::pair<double, double>> occ;
          for (const TaskDraft& other : drafts) {
            for (std::size_t h = 0; h < other.path.size(); ++h) {
              if (other.path[h] == q) occ.emplace_back(other.arr[h], other.dep[h]);
            }
          }
          for (std::size_t h = 0; h < draft.arr.size(); ++h) {
            if (draft.path[h] == q) occ.emplace_back(draft.arr[h], draft.dep[h]);
          }
          const double d = zero_service_departure(net.queues[q], occ, at);
          draft.arr.push_back(at);
          draft.dep.push_back(d);
          at = d;
        }
        drafts.push_back(draft);
        if (drafts_feasible(net, drafts)) {
          placed = true;
        } else {
          drafts.pop_back();
        }
      }
      if (!placed) {
        throw std::runtime_error("initialize_state: could not place a hidden task between "
                                 "entries " +
                                 std::to_string(gap.lo) + " and " + std::to_string(gap.hi));
      }
    }
  }

  const std::vector<int> order = entry_order(drafts);
  EventLog log = assemble(net, drafts, order);
  recover_services(net, log);

  std::vector<JobId> latent;
  for (const Job& job : log.jobs) {
    if (drafts[order[job.task]].hidden) latent.push_back(job.id);
  }

  Theta theta(net.num_queues(), service_rate);
  theta[net.initial_queue] = entry_rate;

  SamplerState state =
      make_sampler_state(net, theta, log, latent, derive_seed(cfg.seed, 1));
  if (!state.latent.empty()) {
    const SliceConfig slice = resolve_slice(cfg, data);
    for (int i = 0; i < cfg.sweeten_sweeps; ++i) sweep(state, slice);
  }
  return state;
}

PosteriorDraws run_posterior(const ObservedDataset& data, const NetworkConfig& net,
                             const PosteriorConfig& cfg) {
  if (cfg.burn_in >= cfg.sweeps) {
    throw std::invalid_argument("run_posterior: burn-in (" + std::to_string(cfg.burn_in) +
                                ") must be smaller than the sweep count (" +
                                std::to_string(cfg.sweeps) + ")");
  }
  if (cfg.burn_in < 0 || cfg.thin <= 0) {
    throw std::invalid_argument("run_posterior: burn-in must be >= 0 and thinning >= 1");
  }
  SamplerState state = initialize_state(data, net, cfg);
  const SliceConfig slice = resolve_slice(cfg, data);

  PosteriorDraws out;
  const std::size_t num_jobs = state.log.jobs.size();
  out.mean_service.assign(num_jobs, 0.0);
  out.mean_wait.assign(num_jobs, 0.0);
  for (int t = 0; t < cfg.sweeps; ++t) {
    const SweepStats st = sweep(state, slice);
    out.stuck_moves += st.stuck;
    gibbs_theta(state, cfg.prior);
    if (t < cfg.burn_in || (t - cfg.burn_in) % cfg.thin != 0) continue;
    out.thetas.push_back(state.theta);
    ++out.draws;
    std::vector<double> s_draw, w_draw;
    if (cfg.collect_jobs) {
      s_draw.reserve(num_jobs);
      w_draw.reserve(num_jobs);
    }
    for (std::size_t j = 0; j < num_jobs; ++j) {
      const ResponseDecomposition r = decompose_response(state.log.jobs[j]);
      out.mean_service[j] += r.service;
      out.mean_wait[j] += r.waiting;
      if (cfg.collect_jobs) {
        s_draw.push_back(r.service);
        w_draw.push_back(r.waiting);
      }
    }
    if (cfg.collect_jobs) {
      out.services.push_back(std::move(s_draw));
      out.waits.push_back(std::move(w_draw));
    }
  }
  for (std::size_t j = 0; j < num_jobs; ++j) {
    out.mean_service[j] /= out.draws;
    out.mean_wait[j] /= out.draws;
  }
  out.last_log = state.log;
  out.job_latent = state.is_latent;
  return out;
}

std::vector<Theta> stochastic_em(const ObservedDataset& data, const NetworkConfig& net,
                                 const PosteriorConfig& cfg) {
  if (cfg.sweeps <= 0) {
    throw std::invalid_argument("stochastic_em: iteration count must be positive");
  }
  SamplerState state = initialize_state(data, net, cfg);
  const SliceConfig slice = resolve_slice(cfg, data);
  std::vector<Theta> path;
  path.reserve(cfg.sweeps);
  for (int t = 0; t < cfg.sweeps; ++t) {
    sweep(state, slice);
    ml_theta_step(state);
    path.push_back(state.theta);
  }
  return path;
}

}  // namespace queuenet
