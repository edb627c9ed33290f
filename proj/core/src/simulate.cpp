#include "queuenet/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace queuenet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_queue_inputs(const std::vector<double>& arrivals,
                        const std::vector<double>& services, bool services_required) {
  if (services_required && services.size() != arrivals.size()) {
    throw std::invalid_argument("arrivals and services must have equal length");
  }
  for (std::size_t i = 1; i < arrivals.size(); ++i) {
    if (arrivals[i] < arrivals[i - 1]) {
      throw std::invalid_argument("arrivals must be sorted ascending");
    }
  }
  if (services_required) {
    for (double s : services) {
      if (!(s >= 0.0)) throw std::invalid_argument("service times must be >= 0");
    }
  }
}

}  // namespace

FcfsSolution solve_fcfs(int processors, const std::vector<double>& arrivals,
                        const std::vector<double>& services) {
  if (processors < 1) throw std::invalid_argument("processors must be >= 1");
  check_queue_inputs(arrivals, services, true);
  const std::size_t n = arrivals.size();
  FcfsSolution out;
  out.d.resize(n);
  out.u.resize(n);
  out.proc.resize(n);
  out.min_clear.resize(n);
  out.clear.resize(n);
  std::vector<double> busy(processors, 0.0);  // clear time per processor
  for (std::size_t e = 0; e < n; ++e) {
    out.clear[e] = busy;
    int p = 0;
    for (int k = 1; k < processors; ++k) {
      if (busy[k] < busy[p]) p = k;  // ties keep the lowest index
    }
    const double c = busy[p];
    const double u = std::max(arrivals[e], c);
    out.proc[e] = p;
    out.min_clear[e] = c;
    out.u[e] = u;
    out.d[e] = services[e] + u;
    busy[p] = out.d[e];
  }
  return out;
}

RssSelector uniform_rss_selector(Rng& rng) {
  return [&rng](const std::vector<std::size_t>& waiting) -> std::size_t {
    return static_cast<std::size_t>(rng.uniform_int(static_cast<int>(waiting.size())));
  };
}

RssSolution solve_rss(const std::vector<double>& arrivals,
                      const std::vector<double>& services, const RssSelector& select) {
  check_queue_inputs(arrivals, services, true);
  const std::size_t n = arrivals.size();
  RssSolution out;
  out.d.assign(n, 0.0);
  out.u.assign(n, 0.0);
  out.gamma.assign(n, -1);
  out.nq.assign(n, 1);

  std::vector<std::size_t> waiting;
  std::size_t next_arrival = 0;
  int in_service = -1;
  double current_d = kInf;
  int last_departed = -1;
  std::size_t departed = 0;
  auto commence = [&](std::size_t job, double at, int nq) {
    out.u[job] = at;
    out.gamma[job] = last_departed;
    out.nq[job] = nq;
    out.d[job] = at + services[job];
    in_service = static_cast<int>(job);
    current_d = out.d[job];
  };
  while (departed < n) {
    const double next_a = next_arrival < n ? arrivals[next_arrival] : kInf;
    if (current_d <= next_a) {
      // Departure first at ties: a job arriving exactly at a departure is not
      // yet eligible for that selection.
      const std::size_t job = static_cast<std::size_t>(in_service);
      last_departed = static_cast<int>(job);
      in_service = -1;
      current_d = kInf;
      ++departed;
      if (!waiting.empty()) {
        const int nq = static_cast<int>(waiting.size());
        const std::size_t pick = select(waiting);
        if (pick >= waiting.size()) {
          throw std::invalid_argument("RSS selector returned an out-of-range position");
        }
        const std::size_t chosen = waiting[pick];
        waiting.erase(waiting.begin() + static_cast<std::ptrdiff_t>(pick));
        commence(chosen, out.d[job], nq);
      }
    } else {
      const std::size_t job = next_arrival++;
      if (in_service < 0) {
        commence(job, arrivals[job], 1);
      } else {
        waiting.push_back(job);
      }
    }
  }
  return out;
}

std::vector<double> solve_ps(const std::vector<double>& arrivals,
                             const std::vector<double>& services, double tol,
                             int max_iter) {
  check_queue_inputs(arrivals, services, true);
  const std::size_t n = arrivals.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = arrivals[i] + services[i];
  if (n <= 1) return d;

  struct Event {
    double t;
    int delta;  // +1 arrival, -1 (previous-iterate) departure
    std::size_t job;
  };
  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<Event> events;
    events.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      events.push_back({arrivals[i], +1, i});
      events.push_back({d[i], -1, i});
    }
    std::sort(events.begin(), events.end(), [](const Event& x, const Event& y) {
      if (x.t != y.t) return x.t < y.t;
      return x.delta < y.delta;  // departures before arrivals; order within a tie is moot
    });
    std::vector<double> remaining(services);
    std::vector<char> integrating(n, 0);
    std::vector<std::size_t> active;  // jobs still absorbing service
    std::vector<double> d_new(n);
    int present = 0;  // occupancy per the previous iterate
    double t = events.front().t;
    std::size_t k = 0;
    while (k < events.size() || !active.empty()) {
      const double t_next = k < events.size() ? events[k].t : kInf;
      if (t_next > t && !active.empty()) {
        // The occupancy (taken from the previous iterate) is constant on the
        // segment, so each active job absorbs service at a fixed rate and
        // finishing times inside the segment are immediate.
        const double rate = 1.0 / std::max(present, 1);
        const double quota = (t_next - t) * rate;
        std::vector<std::size_t> keep;
        keep.reserve(active.size());
        for (std::size_t j : active) {
          if (remaining[j] <= quota) {
            d_new[j] = t + remaining[j] / rate;
            remaining[j] = 0.0;
          } else {
            remaining[j] -= quota;
            keep.push_back(j);
          }
        }
        active.swap(keep);
        t = t_next;
        continue;
      }
      if (k >= events.size()) break;
      t = events[k].t;
      while (k < events.size() && events[k].t == t) {
        if (events[k].delta > 0) {
          present += 1;
          const std::size_t j = events[k].job;
          if (!integrating[j]) {
            integrating[j] = 1;
            if (remaining[j] > 0.0) {
              active.push_back(j);
            } else {
              d_new[j] = arrivals[j];  // zero service departs on arrival
            }
          }
        } else {
          present -= 1;
        }
        ++k;
      }
    }
    double max_change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      max_change = std::max(max_change, std::abs(d_new[i] - d[i]));
    }
    d.swap(d_new);
    if (max_change < tol) return d;
  }
  throw std::runtime_error("solve_ps failed to converge within the iteration cap");
}

std::vector<double> discrete_time_ps(const std::vector<double>& arrivals,
                                     const std::vector<double>& services, double ts) {
  check_queue_inputs(arrivals, services, true);
  if (!(ts > 0.0)) throw std::invalid_argument("time slice must be > 0");
  const std::size_t n = arrivals.size();
  std::vector<double> remaining(services);
  std::vector<double> d(n, 0.0);
  std::size_t done = 0;
  std::size_t next_in = 0;  // arrivals are sorted, admit in order
  std::vector<std::size_t> present;
  double t = 0.0;
  while (done < n) {
    while (next_in < n && arrivals[next_in] <= t) {
      if (remaining[next_in] == 0.0) {
        d[next_in] = arrivals[next_in];
        ++done;
      } else {
        present.push_back(next_in);
      }
      ++next_in;
    }
    if (present.empty()) {
      // Jump to the slice boundary at or after the next arrival.
      t = std::ceil(arrivals[next_in] / ts) * ts;
      if (t < arrivals[next_in]) t += ts;
      continue;
    }
    const double share = ts / static_cast<double>(present.size());
    t += ts;
    std::size_t kept = 0;
    for (std::size_t i : present) {
      remaining[i] -= share;
      if (remaining[i] <= 0.0) {
        d[i] = t;
        ++done;
      } else {
        present[kept++] = i;
      }
    }
    present.resize(kept);
  }
  return d;
}

QueueRecovery recover_fcfs(int processors, const std::vector<double>& arrivals,
                           const std::vector<double>& departures) {
  if (processors < 1) throw std::invalid_argument("processors must be >= 1");
  check_queue_inputs(arrivals, departures, false);
  if (departures.size() != arrivals.size()) {
    throw std::invalid_argument("arrivals and departures must have equal length");
  }
  const std::size_t n = arrivals.size();
  QueueRecovery out;
  out.s.resize(n);
  out.u.resize(n);
  out.proc.resize(n);
  out.min_clear.resize(n);
  out.clear.resize(n);
  std::vector<double> busy(processors, 0.0);
  for (std::size_t e = 0; e < n; ++e) {
    out.clear[e] = busy;
    int p = 0;
    for (int k = 1; k < processors; ++k) {
      if (busy[k] < busy[p]) p = k;
    }
    const double c = busy[p];
    const double u = std::max(arrivals[e], c);
    out.proc[e] = p;
    out.min_clear[e] = c;
    out.u[e] = u;
    out.s[e] = departures[e] - u;
    if (out.s[e] < 0.0) {
      out.feasible = false;
      out.error = "job in arrival position " + std::to_string(e) +
                  " departs before it could commence";
      return out;
    }
    busy[p] = departures[e];
  }
  return out;
}

QueueRecovery recover_rss(const std::vector<double>& arrivals,
                          const std::vector<double>& departures) {
  check_queue_inputs(arrivals, departures, false);
  if (departures.size() != arrivals.size()) {
    throw std::invalid_argument("arrivals and departures must have equal length");
  }
  const std::size_t n = arrivals.size();
  QueueRecovery out;
  out.s.assign(n, 0.0);
  out.u.assign(n, 0.0);
  out.gamma.assign(n, -1);
  out.nq.assign(n, 1);
  if (n == 0) return out;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (departures[x] != departures[y]) return departures[x] < departures[y];
    return x < y;
  });

  // The first departure must belong to the first arrival: the server is idle
  // at the start, so the earliest arrival commences immediately and, being
  // non-preemptive, completes before anything else can.
  std::size_t first_arrival = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (arrivals[i] < arrivals[first_arrival]) first_arrival = i;
  }
  if (order[0] != first_arrival) {
    out.feasible = false;
    out.error = "first departure is not the first arrival (job in departure position 0)";
    return out;
  }

  using HeapEntry = std::pair<double, std::size_t>;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>> pending;
  std::vector<char> departed(n, 0);
  for (std::size_t i = 0; i < n; ++i) pending.push({arrivals[i], i});

  auto drop_departed = [&]() {
    while (!pending.empty() && departed[pending.top().second]) pending.pop();
  };

  {
    const std::size_t e = order[0];
    out.u[e] = arrivals[e];
    out.s[e] = departures[e] - arrivals[e];
    if (out.s[e] < 0.0) {
      out.feasible = false;
      out.error = "job in departure position 0 departs before it arrives";
      return out;
    }
    departed[e] = 1;
  }
  for (std::size_t k = 1; k < n; ++k) {
    const std::size_t p = order[k - 1];
    const std::size_t e = order[k];
    drop_departed();
    const double min_waiting_arrival = pending.empty() ? kInf : pending.top().first;
    if (min_waiting_arrival < departures[p]) {
      // Someone was waiting when p departed; the next commencement is an
      // immediate selection among them, so e must already have arrived.
      if (!(arrivals[e] < departures[p])) {
        out.feasible = false;
        out.error = "job in departure position " + std::to_string(k) +
                    " commences while earlier arrivals wait";
        return out;
      }
    } else {
      // Queue was empty; the server idles until the next arrival, which
      // must be e itself.
      if (arrivals[e] != min_waiting_arrival) {
        out.feasible = false;
        out.error = "job in departure position " + std::to_string(k) +
                    " is not the next arrival after an idle period";
        return out;
      }
    }
    out.gamma[e] = static_cast<int>(p);
    out.u[e] = std::max(arrivals[e], departures[p]);
    out.s[e] = departures[e] - out.u[e];
    if (out.s[e] < 0.0) {
      out.feasible = false;
      out.error = "job in departure position " + std::to_string(k) +
                  " departs before it could commence";
      return out;
    }
    departed[e] = 1;
  }
  // Occupancy at each commencement: the job itself plus every other job
  // arriving before u and departing after it.
  for (std::size_t e = 0; e < n; ++e) {
    int others = 0;
    for (std::size_t x = 0; x < n; ++x) {
      if (x == e) continue;
      if (arrivals[x] < out.u[e] && departures[x] > out.u[e]) ++others;
    }
    out.nq[e] = 1 + others;
  }
  return out;
}

QueueRecovery recover_ps(const std::vector<double>& arrivals,
                         const std::vector<double>& departures) {
  check_queue_inputs(arrivals, departures, false);
  if (departures.size() != arrivals.size()) {
    throw std::invalid_argument("arrivals and departures must have equal length");
  }
  const std::size_t n = arrivals.size();
  QueueRecovery out;
  out.s.assign(n, 0.0);
  out.u.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (departures[i] < arrivals[i]) {
      out.feasible = false;
      out.error = "job in arrival position " + std::to_string(i) +
                  " departs before it arrives";
      return out;
    }
  }

  struct Knot {
    double t;
    int delta;
    std::size_t job;
  };
  std::vector<Knot> knots;
  knots.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    knots.push_back({arrivals[i], +1, i});
    knots.push_back({departures[i], -1, i});
  }
  std::sort(knots.begin(), knots.end(), [](const Knot& x, const Knot& y) {
    if (x.t != y.t) return x.t < y.t;
    return x.delta < y.delta;
  });
  std::vector<char> present(n, 0);
  std::vector<char> always_alone(n, 1);
  std::vector<std::size_t> in_system;
  std::size_t k = 0;
  while (k < knots.size()) {
    const double t = knots[k].t;
    while (k < knots.size() && knots[k].t == t) {
      if (knots[k].delta > 0) {
        present[knots[k].job] = 1;
        in_system.push_back(knots[k].job);
      } else {
        present[knots[k].job] = 0;
        in_system.erase(std::find(in_system.begin(), in_system.end(), knots[k].job));
      }
      ++k;
    }
    if (k >= knots.size() || in_system.empty()) continue;
    const double len = knots[k].t - t;
    if (len <= 0.0) continue;
    const double share = len / static_cast<double>(in_system.size());
    if (in_system.size() > 1) {
      for (std::size_t j : in_system) always_alone[j] = 0;
    }
    for (std::size_t j : in_system) out.s[j] += share;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (always_alone[i]) out.s[i] = departures[i] - arrivals[i];  // exact, no accumulation
    double u = departures[i] - out.s[i];
    if (u < arrivals[i]) u = arrivals[i];
    if (u > departures[i]) u = departures[i];
    out.u[i] = u;
  }
  return out;
}

namespace {

struct QueueJobList {
  std::vector<JobId> ids;  // sorted by (a, id)
};

std::vector<QueueJobList> group_by_queue(const NetworkConfig& net, const EventLog& log) {
  std::vector<QueueJobList> by_queue(net.num_queues());
  for (const Job& job : log.jobs) {
    by_queue[job.queue].ids.push_back(job.id);
  }
  for (auto& list : by_queue) {
    std::sort(list.ids.begin(), list.ids.end(), [&](JobId x, JobId y) {
      if (log.jobs[x].a != log.jobs[y].a) return log.jobs[x].a < log.jobs[y].a;
      return x < y;
    });
  }
  return by_queue;
}

}  // namespace

bool try_recover_services(const NetworkConfig& net, EventLog& log, std::string* error) {
  auto fail = [&](const std::string& message) {
    if (error != nullptr) *error = message;
    return false;
  };
  for (const Job& job : log.jobs) {
    if (job.id != static_cast<JobId>(&job - log.jobs.data())) {
      return fail("job ids must match their positions");
    }
    if (job.queue < 0 || job.queue >= net.num_queues()) {
      return fail("job " + std::to_string(job.id) + " references an unknown queue");
    }
    if (job.pi_pred != kNoJob) {
      if (job.pi_pred < 0 || job.pi_pred >= static_cast<JobId>(log.jobs.size())) {
        return fail("job " + std::to_string(job.id) + " has a dangling predecessor");
      }
      if (log.jobs[job.pi_pred].d != job.a) {
        return fail("job " + std::to_string(job.id) +
                    " arrival differs from its predecessor's departure");
      }
    } else {
      if (job.queue != net.initial_queue) {
        return fail("job " + std::to_string(job.id) +
                    " has no predecessor but is not at the initial queue");
      }
      if (job.a != 0.0) {
        return fail("initial job " + std::to_string(job.id) + " must arrive at time 0");
      }
    }
  }
  auto by_queue = group_by_queue(net, log);
  for (int q = 0; q < net.num_queues(); ++q) {
    const auto& ids = by_queue[q].ids;
    if (ids.empty()) continue;
    std::vector<double> a(ids.size()), d(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      a[i] = log.jobs[ids[i]].a;
      d[i] = log.jobs[ids[i]].d;
    }
    const Discipline disc = net.queues[q].discipline;
    QueueRecovery rec;
    switch (disc) {
      case Discipline::Fcfs:
        rec = recover_fcfs(net.queues[q].processors, a, d);
        break;
      case Discipline::Rss:
        rec = recover_rss(a, d);
        break;
      case Discipline::Ps:
        rec = recover_ps(a, d);
        break;
    }
    if (!rec.feasible) {
      return fail("queue " + std::to_string(q) + ": " + rec.error);
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      Job& job = log.jobs[ids[i]];
      job.s = rec.s[i];
      job.u = rec.u[i];
      job.fcfs = FcfsAux{};
      job.rss = RssAux{};
      job.rho_pred = kNoJob;
      if (disc == Discipline::Fcfs) {
        job.fcfs.proc = rec.proc[i];
        job.fcfs.min_clear = rec.min_clear[i];
        job.fcfs.clear = rec.clear[i];
        job.rho_pred = i > 0 ? ids[i - 1] : kNoJob;
      } else if (disc == Discipline::Rss) {
        job.rss.gamma_pred = rec.gamma[i] >= 0 ? ids[rec.gamma[i]] : kNoJob;
        job.rss.nq = rec.nq[i];
      }
    }
  }
  return true;
}

void recover_services(const NetworkConfig& net, EventLog& log) {
  std::string error;
  if (!try_recover_services(net, log, &error)) {
    throw std::runtime_error("recover_services: " + error);
  }
}

ArrivalSpec ArrivalSpec::poisson(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("Poisson rate must be > 0");
  ArrivalSpec spec;
  spec.kind = Kind::Poisson;
  spec.rate = rate;
  return spec;
}

ArrivalSpec ArrivalSpec::explicit_times(std::vector<double> times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1])) {
      throw std::invalid_argument("explicit entry times must be nonnegative and nondecreasing");
    }
  }
  ArrivalSpec spec;
  spec.kind = Kind::ExplicitTimes;
  spec.times = std::move(times);
  return spec;
}

ArrivalSpec ArrivalSpec::piecewise(std::vector<double> breakpoints, std::vector<double> rates) {
  if (breakpoints.size() != rates.size() || breakpoints.empty()) {
    throw std::invalid_argument("piecewise rate needs one rate per breakpoint");
  }
  if (breakpoints.front() != 0.0) {
    throw std::invalid_argument("piecewise breakpoints must start at 0");
  }
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (breakpoints[i] <= breakpoints[i - 1]) {
      throw std::invalid_argument("piecewise breakpoints must increase");
    }
  }
  double max_rate = 0.0;
  for (double r : rates) {
    if (!(r >= 0.0)) throw std::invalid_argument("piecewise rates must be >= 0");
    max_rate = std::max(max_rate, r);
  }
  if (!(max_rate > 0.0)) {
    throw std::invalid_argument("piecewise rates cannot all be zero");
  }
  ArrivalSpec spec;
  spec.kind = Kind::PiecewiseRate;
  spec.breakpoints = std::move(breakpoints);
  spec.rates = std::move(rates);
  return spec;
}

std::vector<double> sample_entries(const ArrivalSpec& spec, int n, Rng& rng) {
  if (n < 0) throw std::invalid_argument("task count must be >= 0");
  std::vector<double> entries;
  entries.reserve(n);
  switch (spec.kind) {
    case ArrivalSpec::Kind::Poisson: {
      double t = 0.0;
      for (int i = 0; i < n; ++i) {
        t += rng.exponential(spec.rate);
        entries.push_back(t);
      }
      break;
    }
    case ArrivalSpec::Kind::ExplicitTimes: {
      if (static_cast<int>(spec.times.size()) < n) {
        throw std::invalid_argument("not enough explicit entry times");
      }
      entries.assign(spec.times.begin(), spec.times.begin() + n);
      break;
    }
    case ArrivalSpec::Kind::PiecewiseRate: {
      // Thinning against the maximum rate.
      double max_rate = 0.0;
      for (double r : spec.rates) max_rate = std::max(max_rate, r);
      auto rate_at = [&](double t) {
        std::size_t i = spec.breakpoints.size();
        while (i > 0 && spec.breakpoints[i - 1] > t) --i;
        return i == 0 ? spec.rates.front() : spec.rates[i - 1];
      };
      double t = 0.0;
      while (static_cast<int>(entries.size()) < n) {
        t += rng.exponential(max_rate);
        if (rng.uniform() * max_rate <= rate_at(t)) entries.push_back(t);
      }
      break;
    }
  }
  return entries;
}

std::vector<QueueId> sample_path(const NetworkConfig& net, Rng& rng) {
  const int cap = net.effective_max_path_length();
  std::vector<QueueId> path;
  QueueId at = net.initial_queue;
  for (;;) {
    const auto& succ = net.successors[at];
    const QueueId next = succ[rng.uniform_int(static_cast<int>(succ.size()))];
    if (next == kFinalQueue) return path;
    path.push_back(next);
    if (static_cast<int>(path.size()) > cap) {
      throw std::runtime_error("sample_path: path-length guard exceeded (cyclic routing?)");
    }
    at = next;
  }
}

namespace {

// One event in the cross-queue chronological solve. Departures sort before
// arrivals at equal times, so a job arriving exactly when another departs
// sees it already gone.
struct SimEvent {
  double t;
  int kind;  // 0 departure/completion, 1 arrival
  QueueId queue;
  std::int64_t seq;  // job id, or PS epoch for completions

  bool operator>(const SimEvent& other) const {
    return std::tie(t, kind, queue, seq) > std::tie(other.t, other.kind, other.queue, other.seq);
  }
};

struct PsQueueState {
  std::vector<std::pair<JobId, double>> present;  // job id -> remaining service
  double last_update = 0.0;
  std::int64_t epoch = 0;
};

struct RssQueueState {
  JobId in_service = kNoJob;
  std::vector<JobId> waiting;
  JobId last_departed = kNoJob;
};

}  // namespace

EventLog simulate_network(const NetworkConfig& net, const SimInputs& inputs, Rng& rng,
                          const std::map<QueueId, RssSelector>& selectors) {
  {
    const auto errors = validate_network(net);
    if (!errors.empty()) {
      throw std::invalid_argument("simulate_network: invalid network: " + errors.front());
    }
  }
  const int num_tasks = static_cast<int>(inputs.entries.size());
  if (inputs.paths.size() != inputs.entries.size() ||
      inputs.services.size() != inputs.entries.size()) {
    throw std::invalid_argument("simulate_network: inputs must align per task");
  }
  for (int t = 0; t < num_tasks; ++t) {
    if (t > 0 && inputs.entries[t] < inputs.entries[t - 1]) {
      throw std::invalid_argument("simulate_network: entry times must be nondecreasing");
    }
    if (inputs.entries[t] < 0.0) {
      throw std::invalid_argument("simulate_network: entry times must be >= 0");
    }
    if (inputs.paths[t].size() != inputs.services[t].size()) {
      throw std::invalid_argument("simulate_network: per-task path and services must align");
    }
    if (static_cast<int>(inputs.paths[t].size()) > net.effective_max_path_length()) {
      throw std::runtime_error("simulate_network: path-length guard exceeded");
    }
    for (QueueId q : inputs.paths[t]) {
      if (q < 0 || q >= net.num_queues() || q == net.initial_queue) {
        throw std::invalid_argument("simulate_network: invalid queue in path");
      }
    }
    for (double s : inputs.services[t]) {
      if (!(s >= 0.0)) throw std::invalid_argument("simulate_network: negative service time");
    }
  }

  EventLog log;
  log.num_queues = net.num_queues();
  log.num_tasks = num_tasks;

  // Allocate jobs: per task, the initial job followed by its hops, so ids are
  // contiguous per task and initial-job ids increase with entry order.
  std::vector<JobId> initial_job(num_tasks);
  for (int t = 0; t < num_tasks; ++t) {
    const JobId q0_id = static_cast<JobId>(log.jobs.size());
    initial_job[t] = q0_id;
    Job q0_job;
    q0_job.id = q0_id;
    q0_job.task = t;
    q0_job.queue = net.initial_queue;
    q0_job.a = 0.0;
    q0_job.d = inputs.entries[t];
    log.jobs.push_back(q0_job);
    JobId prev = q0_id;
    for (std::size_t h = 0; h < inputs.paths[t].size(); ++h) {
      Job job;
      job.id = static_cast<JobId>(log.jobs.size());
      job.task = t;
      job.queue = inputs.paths[t][h];
      job.s = inputs.services[t][h];
      job.pi_pred = prev;
      log.jobs[prev].pi_succ = job.id;
      prev = job.id;
      log.jobs.push_back(job);
    }
  }

  // The initial queue is fully determined: FCFS, one processor, all arrivals
  // at time 0 in id order, departures are the given entry times.
  {
    double prev_d = 0.0;
    JobId prev_id = kNoJob;
    for (int t = 0; t < num_tasks; ++t) {
      Job& job = log.jobs[initial_job[t]];
      job.u = prev_d;
      job.s = job.d - job.u;
      job.rho_pred = prev_id;
      job.fcfs.proc = 0;
      job.fcfs.clear = {prev_d};
      job.fcfs.min_clear = prev_d;
      prev_d = job.d;
      prev_id = job.id;
    }
  }

  std::priority_queue<SimEvent, std::vector<SimEvent>, std::greater<SimEvent>> heap;
  for (int t = 0; t < num_tasks; ++t) {
    const Job& q0_job = log.jobs[initial_job[t]];
    if (q0_job.pi_succ != kNoJob) {
      Job& first = log.jobs[q0_job.pi_succ];
      first.a = q0_job.d;
      heap.push(SimEvent{first.a, 1, first.queue, first.id});
    }
  }

  std::vector<std::vector<double>> fcfs_busy(net.num_queues());
  std::vector<JobId> fcfs_last_arrival(net.num_queues(), kNoJob);
  std::vector<RssQueueState> rss_state(net.num_queues());
  std::vector<PsQueueState> ps_state(net.num_queues());
  for (int q = 0; q < net.num_queues(); ++q) {
    if (net.queues[q].discipline == Discipline::Fcfs) {
      fcfs_busy[q].assign(net.queues[q].processors, 0.0);
    }
  }

  auto route_onward = [&](JobId id) {
    const Job& job = log.jobs[id];
    if (job.pi_succ == kNoJob) return;
    Job& next = log.jobs[job.pi_succ];
    next.a = job.d;
    heap.push(SimEvent{next.a, 1, next.queue, next.id});
  };

  auto ps_reschedule = [&](QueueId q, double now) {
    PsQueueState& st = ps_state[q];
    if (st.present.empty()) return;
    double min_rem = kInf;
    for (const auto& [id, rem] : st.present) min_rem = std::min(min_rem, rem);
    const double when = now + min_rem * static_cast<double>(st.present.size());
    heap.push(SimEvent{when, 0, q, st.epoch});
  };

  auto ps_settle = [&](QueueId q, double now) {
    PsQueueState& st = ps_state[q];
    if (!st.present.empty() && now > st.last_update) {
      const double share = (now - st.last_update) / static_cast<double>(st.present.size());
      for (auto& [id, rem] : st.present) rem -= share;
    }
    st.last_update = now;
  };

  auto rss_commence = [&](QueueId q, JobId id, double at, int nq) {
    RssQueueState& st = rss_state[q];
    Job& job = log.jobs[id];
    job.u = at;
    job.d = at + job.s;
    job.rss.gamma_pred = st.last_departed;
    job.rss.nq = nq;
    st.in_service = id;
    heap.push(SimEvent{job.d, 0, q, id});
  };

  const auto find_selector = [&](QueueId q) -> const RssSelector* {
    const auto it = selectors.find(q);
    return it == selectors.end() ? nullptr : &it->second;
  };

  while (!heap.empty()) {
    const SimEvent ev = heap.top();
    heap.pop();
    const QueueId q = ev.queue;
    const Discipline disc = net.queues[q].discipline;
    if (ev.kind == 1) {
      const JobId id = static_cast<JobId>(ev.seq);
      Job& job = log.jobs[id];
      switch (disc) {
        case Discipline::Fcfs: {
          auto& busy = fcfs_busy[q];
          int p = 0;
          for (int k = 1; k < static_cast<int>(busy.size()); ++k) {
            if (busy[k] < busy[p]) p = k;
          }
          job.fcfs.clear = busy;
          job.fcfs.min_clear = busy[p];
          job.fcfs.proc = p;
          job.u = std::max(job.a, busy[p]);
          job.d = job.u + job.s;
          job.rho_pred = fcfs_last_arrival[q];
          fcfs_last_arrival[q] = id;
          busy[p] = job.d;
          heap.push(SimEvent{job.d, 0, q, id});
          break;
        }
        case Discipline::Rss: {
          RssQueueState& st = rss_state[q];
          if (st.in_service == kNoJob) {
            rss_commence(q, id, job.a, 1);
          } else {
            st.waiting.push_back(id);
          }
          break;
        }
        case Discipline::Ps: {
          ps_settle(q, ev.t);
          ps_state[q].present.emplace_back(id, job.s);
          ps_state[q].epoch += 1;
          ps_reschedule(q, ev.t);
          break;
        }
      }
    } else {
      switch (disc) {
        case Discipline::Fcfs: {
          route_onward(static_cast<JobId>(ev.seq));
          break;
        }
        case Discipline::Rss: {
          const JobId id = static_cast<JobId>(ev.seq);
          RssQueueState& st = rss_state[q];
          st.in_service = kNoJob;
          st.last_departed = id;
          route_onward(id);
          if (!st.waiting.empty()) {
            std::sort(st.waiting.begin(), st.waiting.end());
            std::vector<std::size_t> candidates(st.waiting.begin(), st.waiting.end());
            const int nq = static_cast<int>(st.waiting.size());
            std::size_t pick;
            if (const RssSelector* sel = find_selector(q)) {
              pick = (*sel)(candidates);
            } else {
              pick = static_cast<std::size_t>(rng.uniform_int(nq));
            }
            if (pick >= st.waiting.size()) {
              throw std::invalid_argument("RSS selector returned an out-of-range position");
            }
            const JobId chosen = st.waiting[pick];
            st.waiting.erase(st.waiting.begin() + static_cast<std::ptrdiff_t>(pick));
            rss_commence(q, chosen, ev.t, nq);
          }
          break;
        }
        case Discipline::Ps: {
          PsQueueState& st = ps_state[q];
          if (ev.seq != st.epoch) break;  // superseded completion estimate
          ps_settle(q, ev.t);
          std::size_t best = 0;
          for (std::size_t i = 1; i < st.present.size(); ++i) {
            if (st.present[i].second < st.present[best].second ||
                (st.present[i].second == st.present[best].second &&
                 st.present[i].first < st.present[best].first)) {
              best = i;
            }
          }
          const JobId id = st.present[best].first;
          st.present.erase(st.present.begin() + static_cast<std::ptrdiff_t>(best));
          st.epoch += 1;
          Job& job = log.jobs[id];
          job.d = ev.t;
          // Commencement is synthetic under PS; defined so that s = d - u.
          job.u = std::max(job.a, std::min(job.d, job.d - job.s));
          route_onward(id);
          ps_reschedule(q, ev.t);
          break;
        }
      }
    }
  }

  return log;
}

EventLog simulate_network(const NetworkConfig& net, const Theta& theta,
                          const ArrivalSpec& arrivals, int num_tasks, Rng& rng,
                          const std::map<QueueId, RssSelector>& selectors) {
  if (static_cast<int>(theta.size()) != net.num_queues()) {
    throw std::invalid_argument("theta must have one rate per queue");
  }
  for (double rate : theta) {
    if (!(rate > 0.0)) throw std::invalid_argument("theta rates must be > 0");
  }
  SimInputs inputs;
  inputs.entries = sample_entries(arrivals, num_tasks, rng);
  inputs.paths.resize(num_tasks);
  inputs.services.resize(num_tasks);
  for (int t = 0; t < num_tasks; ++t) {
    inputs.paths[t] = sample_path(net, rng);
    inputs.services[t].reserve(inputs.paths[t].size());
    for (QueueId q : inputs.paths[t]) {
      inputs.services[t].push_back(rng.exponential(theta[q]));
    }
  }
  return simulate_network(net, inputs, rng, selectors);
}

double mean_task_response(const EventLog& log) {
  double total = 0.0;
  int count = 0;
  for (const Job& job : log.jobs) {
    if (job.pi_pred != kNoJob || job.pi_succ == kNoJob) continue;
    // job is an initial job with at least one real hop
    JobId last = job.pi_succ;
    while (log.jobs[last].pi_succ != kNoJob) last = log.jobs[last].pi_succ;
    total += log.jobs[last].d - log.jobs[job.pi_succ].a;
    ++count;
  }
  if (count == 0) throw std::runtime_error("mean_task_response: no tasks with jobs");
  return total / count;
}

}  // namespace queuenet
