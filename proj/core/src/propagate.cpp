#include "queuenet/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace queuenet {
namespace {

constexpr std::int32_t kIdLow = std::numeric_limits<std::int32_t>::min();

bool jobs_equal(const Job& x, const Job& y) {
  return x.id == y.id && x.task == y.task && x.queue == y.queue && x.a == y.a && x.d == y.d &&
         x.s == y.s && x.u == y.u && x.pi_pred == y.pi_pred && x.pi_succ == y.pi_succ &&
         x.rho_pred == y.rho_pred && x.fcfs.proc == y.fcfs.proc &&
         x.fcfs.min_clear == y.fcfs.min_clear && x.fcfs.clear == y.fcfs.clear &&
         x.rss.gamma_pred == y.rss.gamma_pred && x.rss.nq == y.rss.nq;
}

// Mutates the state in place while recording a before-snapshot per touched
// job, so every change can be reverted (and later replayed) exactly.
struct Staging {
  SamplerState& st;
  std::vector<JobPatch> patches;
  std::unordered_map<JobId, std::size_t> slot;
  bool feasible = true;

  explicit Staging(SamplerState& s) : st(s) {}

  const Job& job(JobId id) const { return st.log.jobs[id]; }

  void set_job(JobId id, const Job& next) {
    auto [it, fresh] = slot.try_emplace(id, patches.size());
    (void)it;
    if (fresh) patches.push_back({st.log.jobs[id], st.log.jobs[id]});
    Job& cur = st.log.jobs[id];
    st.events.update_job(cur, next);
    st.intervals.update_job(cur, next);
    cur = next;
  }

  void finalize_afters() {
    for (JobPatch& p : patches) p.after = st.log.jobs[p.before.id];
  }

  void revert() {
    for (auto it = patches.rbegin(); it != patches.rend(); ++it) {
      Job& cur = st.log.jobs[it->before.id];
      st.events.update_job(cur, it->before);
      st.intervals.update_job(cur, it->before);
      cur = it->before;
    }
  }
};

// --- FCFS -------------------------------------------------------------------

// Walks jobs of FCFS queue q in (current) arrival order starting from `ent`,
// recomputing processor assignments from the running clear-time vector
// `clear` (the state just before the walked job is assigned). Jobs arriving
// at or before `hard_until` are recomputed unconditionally; past that the
// walk stops as soon as the stored values already agree, which guarantees
// everything downstream is untouched. Returns false on a negative service.
bool fcfs_walk(Staging& w, QueueId q, TimeTreap::Entry ent, std::vector<double> clear,
               JobId prev, double hard_until) {
  const TimeTreap& arr = w.st.events.queue(q).arrivals;
  const int procs = w.st.net.queues[q].processors;
  bool have = true;
  while (have) {
    const JobId id = ent.id;
    const Job& cur = w.job(id);
    int p = 0;
    double c = clear[0];
    for (int k = 1; k < procs; ++k) {
      if (clear[k] < c) {
        c = clear[k];
        p = k;
      }
    }
    const double u = std::max(cur.a, c);
    const double s = cur.d - u;
    const bool unchanged = cur.fcfs.proc == p && cur.fcfs.min_clear == c && cur.u == u &&
                           cur.s == s && cur.rho_pred == prev && cur.fcfs.clear == clear;
    if (unchanged) {
      if (cur.a > hard_until) return true;  // stabilized beyond the window
    } else {
      if (s < 0.0) {
        w.feasible = false;
        return false;
      }
      Job next = cur;
      next.u = u;
      next.s = s;
      next.rho_pred = prev;
      next.fcfs.proc = p;
      next.fcfs.min_clear = c;
      next.fcfs.clear = clear;
      w.set_job(id, next);
    }
    clear[p] = cur.d;
    prev = id;
    have = arr.next_of(ent.key, ent.id, ent);
  }
  return true;
}

// Re-derives assignments for every job arriving in [lo, hi] (the move window
// of one arrival), then keeps walking until the downstream state stabilizes.
bool fcfs_arrival_pass(Staging& w, QueueId q, double a_old, double a_new) {
  const double lo = std::min(a_old, a_new);
  const double hi = std::max(a_old, a_new);
  const TimeTreap& arr = w.st.events.queue(q).arrivals;
  TimeTreap::Entry first;
  if (!arr.next_of(lo, kIdLow, first)) return true;
  const int procs = w.st.net.queues[q].processors;
  std::vector<double> clear(procs, 0.0);
  JobId prev = kNoJob;
  TimeTreap::Entry before;
  if (arr.prev_of(first.key, first.id, before)) {
    const Job& pj = w.job(before.id);
    clear = pj.fcfs.clear;
    clear[pj.fcfs.proc] = pj.d;
    prev = before.id;
  }
  return fcfs_walk(w, q, first, std::move(clear), prev, hi);
}

// Recomputes e0's own service and propagates its changed clear time through
// the jobs that arrive after it, stopping at stabilization.
bool fcfs_departure_pass(Staging& w, QueueId q, JobId e0) {
  const Job& e = w.job(e0);
  const double s = e.d - e.u;
  if (s < 0.0) {
    w.feasible = false;
    return false;
  }
  if (s != e.s) {
    Job next = e;
    next.s = s;
    w.set_job(e0, next);
  }
  const Job& cur = w.job(e0);
  const TimeTreap& arr = w.st.events.queue(q).arrivals;
  TimeTreap::Entry ent;
  if (!arr.next_of(cur.a, e0, ent)) return true;
  std::vector<double> clear = cur.fcfs.clear;
  clear[cur.fcfs.proc] = cur.d;
  return fcfs_walk(w, q, ent, std::move(clear), e0,
                   -std::numeric_limits<double>::infinity());
}

// --- RSS --------------------------------------------------------------------

// Reconnects one job to its (possibly new) previous-departure link and
// recomputes commencement and service. Returns false on a negative service.
bool rss_relink(Staging& w, JobId id, JobId gamma) {
  const Job& cur = w.job(id);
  const double u = gamma == kNoJob ? cur.a : std::max(cur.a, w.job(gamma).d);
  const double s = cur.d - u;
  if (s < 0.0) {
    w.feasible = false;
    return false;
  }
  if (u != cur.u || s != cur.s || gamma != cur.rss.gamma_pred) {
    Job next = cur;
    next.u = u;
    next.s = s;
    next.rss.gamma_pred = gamma;
    w.set_job(id, next);
  }
  return true;
}

// Arrival change: the departure order is untouched, so only the moved job's
// commencement needs recomputing against its unchanged predecessor.
bool rss_arrival_pass(Staging& w, JobId succ) {
  return rss_relink(w, succ, w.job(succ).rss.gamma_pred);
}

// Departure change: moving one departure within the order changes the
// previous-departure links at exactly three points — the moved job, the job
// that used to follow it, and the job that now follows it.
bool rss_departure_pass(Staging& w, QueueId q, JobId e0, JobId old_prev, JobId old_next) {
  const TimeTreap& dep = w.st.events.queue(q).departures;
  const Job& e = w.job(e0);
  TimeTreap::Entry ent;
  const JobId new_prev = dep.prev_of(e.d, e0, ent) ? ent.id : kNoJob;
  const JobId new_next = dep.next_of(e.d, e0, ent) ? ent.id : kNoJob;
  if (!rss_relink(w, e0, new_prev)) return false;
  if (new_next != kNoJob && !rss_relink(w, new_next, e0)) return false;
  if (old_next != kNoJob && old_next != new_next && !rss_relink(w, old_next, old_prev)) {
    return false;
  }
  return true;
}

// One realizability condition per consecutive-departure pair (p, n): with
// jobs still in queue at p's departure the next departer must already have
// arrived; with the queue empty it must be the very next pending arrival.
bool rss_pair_ok(const Staging& w, QueueId q, JobId pid) {
  const TimeTreap& arr = w.st.events.queue(q).arrivals;
  const TimeTreap& dep = w.st.events.queue(q).departures;
  const Job& p = w.job(pid);
  TimeTreap::Entry nxt;
  if (!dep.next_of(p.d, pid, nxt)) return true;  // final departure: nothing to check
  const double t = p.d;
  const int waiting = arr.count_less(t) - dep.count_less_equal(t);
  if (waiting > 0) return nxt.satellite < t;
  TimeTreap::Entry cand;
  bool have = arr.next_of(t, kIdLow, cand);
  while (have && cand.satellite <= t) have = arr.next_of(cand.key, cand.id, cand);
  if (!have) return false;
  return nxt.satellite == cand.key;
}

// The first departure of an RSS queue must belong to the first arrival: the
// opening selection happens from a one-job pool.
bool rss_first_departure_ok(const Staging& w, QueueId q) {
  const QueueTreaps& t = w.st.events.queue(q);
  TimeTreap::Entry fd;
  if (!t.departures.min_entry(fd)) return true;
  TimeTreap::Entry fa;
  t.arrivals.min_entry(fa);
  return fd.id == fa.id;
}

struct RssRole {
  QueueId queue = -1;
  bool departure_moved = false;  // e0 lives here
  bool arrival_moved = false;    // the path successor lives here
  JobId e0 = kNoJob;
  JobId old_prev = kNoJob;
  JobId succ = kNoJob;
};

// Refreshes selection-pool sizes for every commencement the move can see and
// re-validates the realizability conditions around the disturbed region.
bool rss_finalize(Staging& w, const RssRole& role, double lo, double hi) {
  const QueueId q = role.queue;
  const QueueTreaps& t = w.st.events.queue(q);

  // Pool sizes: any job whose commencement sits in the disturbed window, plus
  // every job this proposal already touched in the queue.
  std::vector<JobId> nq_candidates;
  std::vector<TimeTreap::Entry> ents;
  t.commencements.collect_range(lo, hi, /*closed=*/true, ents);
  for (const auto& ent : ents) nq_candidates.push_back(ent.id);
  for (const JobPatch& p : w.patches) {
    if (p.before.queue == q) nq_candidates.push_back(p.before.id);
  }
  std::sort(nq_candidates.begin(), nq_candidates.end());
  nq_candidates.erase(std::unique(nq_candidates.begin(), nq_candidates.end()),
                      nq_candidates.end());
  for (JobId id : nq_candidates) {
    const Job& cur = w.job(id);
    const int nq = rss_nq(w.st.events, cur);
    if (nq != cur.rss.nq) {
      Job next = cur;
      next.rss.nq = nq;
      w.set_job(id, next);
    }
  }

  // Realizability: departures inside the window, the last one before it, and
  // the pairs whose membership or wording changed with the move.
  std::vector<JobId> pair_candidates;
  ents.clear();
  t.departures.collect_range(lo, hi, /*closed=*/true, ents);
  for (const auto& ent : ents) pair_candidates.push_back(ent.id);
  TimeTreap::Entry ent;
  if (t.departures.prev_of(lo, kIdLow, ent)) pair_candidates.push_back(ent.id);
  if (role.departure_moved) {
    const Job& e = w.job(role.e0);
    if (role.old_prev != kNoJob) pair_candidates.push_back(role.old_prev);
    if (t.departures.prev_of(e.d, e.id, ent)) pair_candidates.push_back(ent.id);
    pair_candidates.push_back(role.e0);
  }
  if (role.arrival_moved) {
    const Job& sj = w.job(role.succ);
    if (t.departures.prev_of(sj.d, sj.id, ent)) pair_candidates.push_back(ent.id);
  }
  std::sort(pair_candidates.begin(), pair_candidates.end());
  pair_candidates.erase(std::unique(pair_candidates.begin(), pair_candidates.end()),
                        pair_candidates.end());
  for (JobId id : pair_candidates) {
    if (!rss_pair_ok(w, q, id)) {
      w.feasible = false;
      return false;
    }
  }
  if (!rss_first_departure_ok(w, q)) {
    w.feasible = false;
    return false;
  }
  return true;
}

// --- PS ---------------------------------------------------------------------

// Service time of one job under processor sharing, integrated in closed form
// over the occupancy step function. Mirrors the scratch recovery exactly:
// same segment boundaries, same per-segment occupancy, same accumulation
// order, and the same shortcut for jobs that never share the processor.
double ps_integrate(const Staging& w, QueueId q, const Job& cur) {
  std::vector<TimeTreap::Entry> overlap;
  w.st.intervals.queue(q).collect_overlapping(cur.a, cur.d, true, true, overlap);
  bool alone = true;
  for (const auto& g : overlap) {
    if (g.id != cur.id && g.key < cur.d && g.satellite > cur.a) {
      alone = false;
      break;
    }
  }
  if (alone) return cur.d - cur.a;

  std::vector<double> knots;
  knots.push_back(cur.a);
  knots.push_back(cur.d);
  for (const auto& g : overlap) {
    if (g.id == cur.id) continue;
    if (g.key > cur.a && g.key < cur.d) knots.push_back(g.key);
    if (g.satellite > cur.a && g.satellite < cur.d) knots.push_back(g.satellite);
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double t1 = knots[i];
    const double t2 = knots[i + 1];
    int count = 0;
    for (const auto& g : overlap) {
      if (g.key <= t1 && g.satellite >= t2) ++count;
    }
    s += (t2 - t1) / static_cast<double>(count);
  }
  return s;
}

// Reintegrates the service of every job the move can affect in a PS queue.
bool ps_finalize(Staging& w, QueueId q, const std::vector<JobId>& delta_ids) {
  for (JobId id : delta_ids) {
    const Job& cur = w.job(id);
    if (cur.d < cur.a) {
      w.feasible = false;
      return false;
    }
    const double s = ps_integrate(w, q, cur);
    double u = cur.d - s;
    if (u < cur.a) u = cur.a;
    if (u > cur.d) u = cur.d;
    if (s != cur.s || u != cur.u) {
      Job next = cur;
      next.s = s;
      next.u = u;
      w.set_job(id, next);
    }
  }
  return true;
}

}  // namespace

StagedUpdate propose_departure_change(SamplerState& state, JobId e0, double d_new) {
  if (e0 < 0 || e0 >= static_cast<JobId>(state.log.jobs.size())) {
    throw std::invalid_argument("propose_departure_change: job id out of range");
  }
  StagedUpdate upd;
  upd.moved = e0;
  upd.d_old = state.log.jobs[e0].d;
  upd.d_new = d_new;
  upd.base_version = state.version;
  upd.log_density_before = state.log_density;
  if (!std::isfinite(d_new)) return upd;

  const QueueId qe = state.log.jobs[e0].queue;
  const JobId succ = state.log.jobs[e0].pi_succ;
  const QueueId qs = succ == kNoJob ? -1 : state.log.jobs[succ].queue;
  const double lo = std::min(upd.d_old, d_new);
  const double hi = std::max(upd.d_old, d_new);
  auto disc = [&](QueueId q) { return state.net.queues[q].discipline; };

  Staging w(state);

  // Pre-capture on the untouched state: the affected-job sets of PS queues
  // (with their current occupancy factors) and the old departure neighbors
  // of e0 in an RSS queue.
  std::vector<std::pair<QueueId, std::vector<JobId>>> ps_sets;
  std::unordered_map<JobId, double> ps_h_old;
  {
    std::unordered_set<JobId> seen;
    auto capture = [&](QueueId q, JobId primary) {
      std::vector<JobId>* ids = nullptr;
      for (auto& entry : ps_sets) {
        if (entry.first == q) ids = &entry.second;
      }
      if (ids == nullptr) {
        ps_sets.emplace_back(q, std::vector<JobId>{});
        ids = &ps_sets.back().second;
      }
      for (const auto& ent : state.intervals.intersecting(q, lo, hi)) {
        if (seen.insert(ent.id).second) ids->push_back(ent.id);
      }
      if (seen.insert(primary).second) ids->push_back(primary);
    };
    if (disc(qe) == Discipline::Ps) capture(qe, e0);
    if (succ != kNoJob && disc(qs) == Discipline::Ps) capture(qs, succ);
    for (const auto& [q, ids] : ps_sets) {
      (void)q;
      for (JobId id : ids) {
        ps_h_old.emplace(
            id, -std::log(static_cast<double>(ps_crowd(state.events, state.log.jobs[id]))));
      }
    }
  }
  RssRole role_e;
  if (disc(qe) == Discipline::Rss) {
    role_e.queue = qe;
    role_e.departure_moved = true;
    role_e.e0 = e0;
    const TimeTreap& dep = state.events.queue(qe).departures;
    TimeTreap::Entry ent;
    if (dep.prev_of(upd.d_old, e0, ent)) role_e.old_prev = ent.id;
  }
  JobId rss_old_next = kNoJob;
  if (role_e.departure_moved) {
    TimeTreap::Entry ent;
    if (state.events.queue(qe).departures.next_of(upd.d_old, e0, ent)) rss_old_next = ent.id;
  }

  // Stage the primary edits: the departure itself and the successor arrival
  // riding on it (they are the same timestamp by construction).
  {
    Job next = state.log.jobs[e0];
    next.d = d_new;
    w.set_job(e0, next);
    if (succ != kNoJob) {
      Job ns = state.log.jobs[succ];
      ns.a = d_new;
      w.set_job(succ, ns);
    }
  }

  // Discipline passes: successor's arrival change first, then the departure.
  bool ok = true;
  if (succ != kNoJob) {
    switch (disc(qs)) {
      case Discipline::Fcfs:
        ok = fcfs_arrival_pass(w, qs, upd.d_old, d_new);
        break;
      case Discipline::Rss:
        ok = rss_arrival_pass(w, succ);
        break;
      case Discipline::Ps:
        break;  // resolved in the reintegration below
    }
  }
  if (ok) {
    switch (disc(qe)) {
      case Discipline::Fcfs:
        ok = fcfs_departure_pass(w, qe, e0);
        break;
      case Discipline::Rss:
        ok = rss_departure_pass(w, qe, e0, role_e.old_prev, rss_old_next);
        break;
      case Discipline::Ps:
        break;
    }
  }
  if (ok) {
    for (const auto& [q, ids] : ps_sets) {
      if (!ps_finalize(w, q, ids)) {
        ok = false;
        break;
      }
    }
  }
  if (ok) {
    std::vector<RssRole> roles;
    if (role_e.departure_moved) roles.push_back(role_e);
    if (succ != kNoJob && disc(qs) == Discipline::Rss) {
      if (!roles.empty() && roles.front().queue == qs) {
        roles.front().arrival_moved = true;
        roles.front().succ = succ;
      } else {
        RssRole role_s;
        role_s.queue = qs;
        role_s.arrival_moved = true;
        role_s.succ = succ;
        roles.push_back(role_s);
      }
    }
    for (const RssRole& role : roles) {
      if (!rss_finalize(w, role, lo, hi)) {
        ok = false;
        break;
      }
    }
  }

  w.finalize_afters();
  if (ok && w.feasible) {
    double delta = 0.0;
    std::unordered_set<JobId> have_factor;
    for (const JobPatch& p : w.patches) {
      const QueueId q = p.before.queue;
      FactorDelta fd;
      fd.job = p.before.id;
      fd.f_before = service_logpdf(state.theta[q], p.before.s);
      fd.f_after = service_logpdf(state.theta[q], p.after.s);
      switch (disc(q)) {
        case Discipline::Fcfs:
          break;
        case Discipline::Rss:
          fd.h_before = -std::log(static_cast<double>(p.before.rss.nq));
          fd.h_after = -std::log(static_cast<double>(p.after.rss.nq));
          break;
        case Discipline::Ps:
          fd.h_before = ps_h_old.at(p.before.id);
          fd.h_after = -std::log(
              static_cast<double>(ps_crowd(state.events, state.log.jobs[p.before.id])));
          break;
      }
      delta += (fd.f_after - fd.f_before) + (fd.h_after - fd.h_before);
      have_factor.insert(fd.job);
      upd.factors.push_back(fd);
    }
    // PS jobs whose occupancy factor moved without any stored-field change.
    for (const auto& [q, ids] : ps_sets) {
      for (JobId id : ids) {
        if (have_factor.count(id)) continue;
        const double h_new = -std::log(
            static_cast<double>(ps_crowd(state.events, state.log.jobs[id])));
        const double h_old = ps_h_old.at(id);
        if (h_new != h_old) {
          FactorDelta fd;
          fd.job = id;
          fd.f_before = fd.f_after = service_logpdf(state.theta[q], state.log.jobs[id].s);
          fd.h_before = h_old;
          fd.h_after = h_new;
          delta += h_new - h_old;
          upd.factors.push_back(fd);
        }
      }
    }
    upd.feasible = true;
    upd.delta = delta;
  }
  w.revert();
  upd.patches = std::move(w.patches);
  return upd;
}

void apply_update(SamplerState& state, const StagedUpdate& upd) {
  if (upd.base_version != state.version) {
    throw std::logic_error("stale update: staged against version " +
                           std::to_string(upd.base_version) + ", state is at " +
                           std::to_string(state.version));
  }
  if (!upd.feasible) {
    throw std::logic_error("cannot apply an infeasible update");
  }
  for (const JobPatch& p : upd.patches) {
    Job& cur = state.log.jobs[p.before.id];
    if (!jobs_equal(cur, p.before)) {
      throw std::logic_error("update does not match the state it was staged against");
    }
    state.events.update_job(cur, p.after);
    state.intervals.update_job(cur, p.after);
    cur = p.after;
  }
  state.version = upd.base_version + 1;
  state.log_density = upd.log_density_before + upd.delta;
}

void rollback_update(SamplerState& state, const StagedUpdate& upd) {
  if (state.version != upd.base_version + 1) {
    throw std::logic_error("rollback of a non-current update: state is at version " +
                           std::to_string(state.version) + ", update applied at " +
                           std::to_string(upd.base_version + 1));
  }
  for (auto it = upd.patches.rbegin(); it != upd.patches.rend(); ++it) {
    Job& cur = state.log.jobs[it->before.id];
    if (!jobs_equal(cur, it->after)) {
      throw std::logic_error("rollback does not match the applied state");
    }
    state.events.update_job(cur, it->before);
    state.intervals.update_job(cur, it->before);
    cur = it->before;
  }
  state.version = upd.base_version;
  state.log_density = upd.log_density_before;
}

}  // namespace queuenet
