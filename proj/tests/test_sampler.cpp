#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/gamma.hpp>

#include "doctest.h"
#include "geweke_support.hpp"
#include "queuenet/likelihood.hpp"
#include "queuenet/observe.hpp"
#include "queuenet/propagate.hpp"
#include "queuenet/rng.hpp"
#include "queuenet/sampler.hpp"
#include "queuenet/simulate.hpp"
#include "stats_support.hpp"
#include "test_support.hpp"

using namespace queuenet;
using queuenet::testing::ks_pvalue;
using queuenet::testing::mean_of;
using queuenet::testing::single_queue_net;
using queuenet::testing::tandem_net;
using queuenet::testing::tv_samples_vs_grid;

namespace {

// Three-task, two-queue log: q0 jobs 0..2 with departures = entries, work
// jobs 3..5 with the given exits. recover_services fills the rest.
EventLog two_hop(const NetworkConfig& net, const std::vector<double>& entries,
                 const std::vector<double>& exits) {
  const int n = static_cast<int>(entries.size());
  EventLog log;
  log.num_queues = 2;
  log.num_tasks = n;
  for (int t = 0; t < n; ++t) {
    Job j;
    j.id = t;
    j.task = t;
    j.queue = 0;
    j.a = 0.0;
    j.d = entries[t];
    j.pi_pred = kNoJob;
    j.pi_succ = n + t;
    log.jobs.push_back(j);
  }
  for (int t = 0; t < n; ++t) {
    Job j;
    j.id = n + t;
    j.task = t;
    j.queue = 1;
    j.a = entries[t];
    j.d = exits[t];
    j.pi_pred = t;
    j.pi_succ = kNoJob;
    log.jobs.push_back(j);
  }
  recover_services(net, log);
  return log;
}

// Unnormalized log conditional of moving job `e` (and the paired downstream
// arrival) to x, evaluated from scratch on a copy of the log.
double conditional_logf(const NetworkConfig& net, const Theta& theta, const EventLog& log,
                        JobId e, double x) {
  EventLog copy = log;
  copy.jobs[e].d = x;
  if (copy.jobs[e].pi_succ != kNoJob) copy.jobs[copy.jobs[e].pi_succ].a = x;
  return log_joint(net, theta, copy);
}

std::vector<double> draw_slice_chain(SamplerState& state, JobId e, const SliceConfig& cfg,
                                     int discard, int keep) {
  std::vector<double> draws;
  draws.reserve(keep);
  for (int i = 0; i < discard + keep; ++i) {
    slice_update_departure(state, e, cfg);
    if (i >= discard) draws.push_back(state.log.jobs[e].d);
  }
  return draws;
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("slice update targets the piecewise-exponential conditional") {
  // Light traffic: the middle task's entry is free in (1, 2.3]; the density
  // is flat until the work queue idles at 1.4, then rises like exp(2x).
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);
  const Theta theta{0.1, 2.0};
  const EventLog log = two_hop(net, {1.0, 2.0, 3.0}, {1.4, 2.3, 3.5});
  const JobId e = 1;

  // The scratch conditional matches the hand analysis: only the middle work
  // job's service s(x) = 2.3 - max(x, 1.4) depends on x.
  const double base = conditional_logf(net, theta, log, e, 2.0);
  REQUIRE(std::isfinite(base));
  for (double x : {1.2, 1.39, 1.7, 2.25}) {
    const double s = 2.3 - std::max(x, 1.4);
    const double hand = -2.0 * (s - 0.3);
    CHECK(std::abs((conditional_logf(net, theta, log, e, x) - base) - hand) <= 1e-9);
  }
  CHECK(conditional_logf(net, theta, log, e, 0.99) == kNegInf);
  CHECK(conditional_logf(net, theta, log, e, 2.31) == kNegInf);
  CHECK(conditional_logf(net, theta, log, e, 3.01) == kNegInf);

  const int grid_n = 4001;
  std::vector<double> gx, glf;
  for (int i = 0; i < grid_n; ++i) {
    const double x = 1.0 + (2.3 - 1.0) * (i + 0.5) / grid_n;
    gx.push_back(x);
    glf.push_back(conditional_logf(net, theta, log, e, x));
  }

  SamplerState state = make_sampler_state(net, theta, log, {e}, 2024);
  const SliceConfig cfg{1.0, 16, 64};
  const std::vector<double> draws = draw_slice_chain(state, e, cfg, 200, 20000);

  for (double x : draws) {
    REQUIRE(x > 1.0);
    REQUIRE(x <= 2.3 + 1e-12);
  }
  CHECK(tv_samples_vs_grid(draws, gx, glf, 40, 1.0, 2.3) <= 0.05);

  // Observed coordinates never drift and the running density stays exact.
  CHECK(state.log.jobs[0].d == 1.0);
  CHECK(state.log.jobs[2].d == 3.0);
  CHECK(state.log.jobs[3].d == 1.4);
  CHECK(state.log.jobs[4].d == 2.3);
  CHECK(state.log.jobs[5].d == 3.5);
  CHECK(state.log.jobs[4].a == state.log.jobs[1].d);
  CHECK(std::abs(state.log_density - log_joint(net, state.theta, state.log)) <= 1e-9);
}

TEST_CASE("slice update reproduces a uniform conditional under heavy load") {
  // Saturated work queue: every service downstream is pinned, so the middle
  // entry is exactly uniform on (1, 3).
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);
  const Theta theta{2.0, 0.5};
  const EventLog log = two_hop(net, {1.0, 2.0, 3.0}, {3.2, 4.0, 5.0});
  const JobId e = 1;

  const double at15 = conditional_logf(net, theta, log, e, 1.5);
  const double at25 = conditional_logf(net, theta, log, e, 2.5);
  REQUIRE(std::isfinite(at15));
  CHECK(std::abs(at15 - at25) <= 1e-9);
  CHECK(conditional_logf(net, theta, log, e, 0.99) == kNegInf);
  CHECK(conditional_logf(net, theta, log, e, 3.01) == kNegInf);

  const int grid_n = 2001;
  std::vector<double> gx, glf;
  for (int i = 0; i < grid_n; ++i) {
    const double x = 1.0 + 2.0 * (i + 0.5) / grid_n;
    gx.push_back(x);
    glf.push_back(conditional_logf(net, theta, log, e, x));
  }

  SamplerState state = make_sampler_state(net, theta, log, {e}, 4096);
  const SliceConfig cfg{1.0, 16, 64};
  const std::vector<double> draws = draw_slice_chain(state, e, cfg, 200, 20000);

  double lo = 10.0, hi = -10.0;
  for (double x : draws) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(lo > 1.0);
  CHECK(hi < 3.0);
  CHECK(std::abs(mean_of(draws) - 2.0) <= 0.03);
  CHECK(tv_samples_vs_grid(draws, gx, glf, 40, 1.0, 3.0) <= 0.05);
  CHECK(std::abs(state.log_density - log_joint(net, state.theta, state.log)) <= 1e-9);
}

TEST_CASE("slice shrinkage collapse keeps the current value") {
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);
  const Theta theta{2.0, 0.5};
  const EventLog log = two_hop(net, {1.0, 2.0, 3.0}, {3.2, 4.0, 5.0});

  // A huge bracket with a single shrink attempt almost surely lands outside
  // the feasible (1, 3) window, so the kernel must keep the current point.
  bool saw_stuck = false;
  for (std::uint64_t seed = 1; seed <= 40 && !saw_stuck; ++seed) {
    SamplerState state = make_sampler_state(net, theta, log, {1}, seed);
    const double d_before = state.log.jobs[1].d;
    const double density_before = state.log_density;
    const std::uint64_t version_before = state.version;
    const SliceStats stats = slice_update_departure(state, 1, SliceConfig{500.0, 0, 1});
    if (stats.stuck) {
      saw_stuck = true;
      CHECK_FALSE(stats.moved);
      CHECK(state.log.jobs[1].d == d_before);
      CHECK(state.log_density == density_before);
      CHECK(state.version == version_before);
    }
  }
  CHECK(saw_stuck);

  SamplerState state = make_sampler_state(net, theta, log, {1}, 3);
  CHECK_THROWS_AS(slice_update_departure(state, 0, SliceConfig{1.0, 16, 64}),
                  std::invalid_argument);  // job 0 is not latent
  CHECK_THROWS_AS(slice_update_departure(state, 1, SliceConfig{0.0, 16, 64}),
                  std::invalid_argument);
  CHECK_THROWS_AS(slice_update_departure(state, 1, SliceConfig{1.0, 16, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(slice_update_departure(state, 99, SliceConfig{1.0, 16, 64}),
                  std::invalid_argument);
}

TEST_CASE("sweeps keep incremental bookkeeping aligned with recomputation") {
  const NetworkConfig net =
      tandem_net({QueueConfig{Discipline::Fcfs, 2}, QueueConfig{Discipline::Rss, 1},
                  QueueConfig{Discipline::Ps, 1}});
  const Theta theta{1.0, 1.5, 1.2, 1.3};
  Rng rng(17);
  const EventLog log = simulate_network(net, theta, ArrivalSpec::poisson(1.0), 25, rng);

  std::vector<JobId> latent;
  for (JobId j = 0; j < static_cast<JobId>(log.jobs.size()); j += 3) latent.push_back(j);
  SamplerState state = make_sampler_state(net, theta, log, latent, 99);

  std::vector<double> fixed_d(log.jobs.size());
  for (std::size_t j = 0; j < log.jobs.size(); ++j) fixed_d[j] = log.jobs[j].d;

  const SliceConfig cfg{0.8, 16, 64};
  int total_moved = 0;
  for (int it = 0; it < 30; ++it) {
    const SweepStats st = sweep(state, cfg);
    total_moved += st.moved;
    gibbs_theta(state);
    REQUIRE(std::abs(state.log_density - log_joint(net, state.theta, state.log)) <= 1e-6);
  }
  CHECK(total_moved > 100);

  // Non-latent departures never move.
  for (std::size_t j = 0; j < state.log.jobs.size(); ++j) {
    if (!state.is_latent[j]) CHECK(state.log.jobs[j].d == fixed_d[j]);
  }

  // The mutated log is still a valid trajectory and a state rebuilt from it
  // reproduces the same density.
  SamplerState rebuilt = make_sampler_state(net, state.theta, state.log, latent, 1);
  CHECK(std::abs(rebuilt.log_density - state.log_density) <= 1e-9);

  // An empty latent set makes the sweep a no-op.
  SamplerState frozen = make_sampler_state(net, theta, log, {}, 5);
  const double before = frozen.log_density;
  const SweepStats none = sweep(frozen, cfg);
  CHECK(none.moved == 0);
  CHECK(none.stuck == 0);
  CHECK(none.evals == 0);
  CHECK(frozen.log_density == before);
  CHECK(frozen.version == 0);
}

TEST_CASE("rate resampling follows the closed-form gamma conditional") {
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);
  // Entries (1, 2), exits (2, 5): work services are 1 and 3, entry gaps 1 and
  // 1, so the scale-free conditionals are Gamma(2, 4) and Gamma(2, 2).
  const EventLog log = two_hop(net, {1.0, 2.0}, {2.0, 5.0});
  SamplerState state = make_sampler_state(net, Theta{1.0, 1.0}, log, {}, 314);

  const std::uint64_t v0 = state.version;
  gibbs_theta(state);
  CHECK(state.version == v0 + 1);
  CHECK(std::abs(state.log_density - log_joint(net, state.theta, state.log)) <= 1e-9);

  std::vector<double> work_draws, entry_draws;
  for (int i = 0; i < 4000; ++i) {
    gibbs_theta(state);
    work_draws.push_back(state.theta[1]);
    entry_draws.push_back(state.theta[0]);
  }
  CHECK(std::abs(state.log_density - log_joint(net, state.theta, state.log)) <= 1e-8);
  CHECK(std::abs(mean_of(work_draws) - 0.5) <= 0.03);
  CHECK(std::abs(mean_of(entry_draws) - 1.0) <= 0.06);

  const boost::math::gamma_distribution<> work_gamma(2.0, 1.0 / 4.0);
  CHECK(ks_pvalue(work_draws, [&](double x) { return boost::math::cdf(work_gamma, x); }) > 0.01);
  const boost::math::gamma_distribution<> entry_gamma(2.0, 1.0 / 2.0);
  CHECK(ks_pvalue(entry_draws, [&](double x) { return boost::math::cdf(entry_gamma, x); }) >
        0.01);

  // A proper prior shifts the conditional to Gamma(shape + n, rate + S).
  std::vector<double> prior_draws;
  for (int i = 0; i < 4000; ++i) {
    gibbs_theta(state, GammaPrior{3.0, 1.0});
    prior_draws.push_back(state.theta[1]);
  }
  const boost::math::gamma_distribution<> posterior_gamma(5.0, 1.0 / 5.0);
  CHECK(ks_pvalue(prior_draws, [&](double x) { return boost::math::cdf(posterior_gamma, x); }) >
        0.01);

  CHECK_THROWS_AS(gibbs_theta(state, GammaPrior{-1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("rate moves refuse queues without data") {
  NetworkConfig net;
  net.queues = {QueueConfig{Discipline::Fcfs, 1}, QueueConfig{Discipline::Fcfs, 1},
                QueueConfig{Discipline::Fcfs, 1}};
  net.successors = {{1, 2}, {kFinalQueue}, {kFinalQueue}};
  net.initial_queue = 0;

  SimInputs inputs;
  inputs.entries = {1.0, 2.0};
  inputs.paths = {{1}, {1}};  // queue 2 never visited
  inputs.services = {{1.0}, {2.0}};
  Rng rng(1);
  const EventLog log = simulate_network(net, inputs, rng);

  SamplerState state = make_sampler_state(net, Theta{1.0, 1.0, 1.0}, log, {}, 7);
  CHECK_THROWS_AS(gibbs_theta(state), std::runtime_error);
  CHECK_THROWS_AS(ml_theta_step(state), std::runtime_error);
  // A proper prior keeps the conditional well defined everywhere.
  gibbs_theta(state, GammaPrior{2.0, 2.0});
  CHECK(state.theta[2] > 0.0);
}

TEST_CASE("maximum-likelihood step matches the count-over-service ratio") {
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);
  const EventLog log = two_hop(net, {1.0, 2.0}, {2.0, 5.0});
  SamplerState state = make_sampler_state(net, Theta{3.0, 3.0}, log, {}, 0);

  ml_theta_step(state);
  CHECK(state.theta[0] == 1.0);  // 2 entry gaps totalling 2
  CHECK(state.theta[1] == 0.5);  // 2 services totalling 4
  CHECK(std::abs(state.log_density - log_joint(net, state.theta, state.log)) <= 1e-9);

  // Zero total service makes the estimate undefined.
  const EventLog degenerate = two_hop(net, {1.0, 2.0}, {1.0, 2.0});
  SamplerState bad = make_sampler_state(net, Theta{1.0, 1.0}, degenerate, {}, 0);
  CHECK_THROWS_AS(ml_theta_step(bad), std::runtime_error);
}

TEST_CASE("initialization reproduces fully observed data") {
  const NetworkConfig net =
      tandem_net({QueueConfig{Discipline::Fcfs, 1}, QueueConfig{Discipline::Rss, 1}});
  const Theta theta{1.0, 1.6, 1.3};
  Rng rng(23);
  const EventLog log = simulate_network(net, theta, ArrivalSpec::poisson(1.0), 12, rng);
  const ObservedDataset data = observe(log, ObservationScheme{1.0, 8});

  PosteriorConfig cfg;
  cfg.seed = 5;
  const SamplerState state = initialize_state(data, net, cfg);

  CHECK(state.latent.empty());
  REQUIRE(state.log.jobs.size() == log.jobs.size());
  CHECK(state.log.num_tasks == 12);
  for (std::size_t j = 0; j < log.jobs.size(); ++j) {
    CHECK(state.log.jobs[j].task == log.jobs[j].task);
    CHECK(state.log.jobs[j].queue == log.jobs[j].queue);
    CHECK(state.log.jobs[j].a == log.jobs[j].a);
    CHECK(state.log.jobs[j].d == log.jobs[j].d);
    CHECK(std::abs(state.log.jobs[j].s - log.jobs[j].s) <= 1e-9);
  }
  CHECK(std::isfinite(state.log_density));
  CHECK(std::abs(state.log_density - log_joint(net, state.theta, state.log)) <= 1e-9);
}

TEST_CASE("initialization fills counter gaps with feasible hidden tasks") {
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);
  const Theta theta{1.0, 1.5};
  Rng rng(31);
  const EventLog log = simulate_network(net, theta, ArrivalSpec::poisson(1.0), 20, rng);
  const ObservedDataset data = observe(log, ObservationScheme{0.5, 3});
  REQUIRE(data.records.size() >= 2);
  REQUIRE(data.records.size() <= 18);

  PosteriorConfig cfg;
  cfg.seed = 11;
  const SamplerState state = initialize_state(data, net, cfg);

  const int hidden = 20 - static_cast<int>(data.records.size());
  CHECK(state.log.num_tasks == 20);
  CHECK(static_cast<int>(state.latent.size()) == 2 * hidden);
  CHECK(std::isfinite(state.log_density));
  CHECK(std::abs(state.log_density - log_joint(net, state.theta, state.log)) <= 1e-9);

  // Every observed time survives untouched.
  for (const ObservedTask& rec : data.records) {
    for (const ObservedJob& oj : rec.jobs) {
      const bool present =
          std::any_of(state.log.jobs.begin(), state.log.jobs.end(), [&](const Job& j) {
            return j.queue == oj.queue && j.a == oj.a && j.d == oj.d && !state.is_latent[j.id];
          });
      CHECK(present);
    }
  }

  // Entry counters are consistent: at each record's entry, the number of
  // tasks entered so far (hidden included) equals the recorded count.
  std::vector<double> entries;
  for (const Job& j : state.log.jobs) {
    if (j.pi_pred == kNoJob) entries.push_back(j.d);
  }
  REQUIRE(static_cast<int>(entries.size()) == 20);
  for (const ObservedTask& rec : data.records) {
    const double e = rec.jobs.front().d;
    const int count = static_cast<int>(
        std::count_if(entries.begin(), entries.end(), [&](double x) { return x <= e; }));
    CHECK(count == rec.n0);
  }

  // Deterministic given the configuration.
  const SamplerState repeat = initialize_state(data, net, cfg);
  REQUIRE(repeat.log.jobs.size() == state.log.jobs.size());
  for (std::size_t j = 0; j < state.log.jobs.size(); ++j) {
    CHECK(repeat.log.jobs[j].a == state.log.jobs[j].a);
    CHECK(repeat.log.jobs[j].d == state.log.jobs[j].d);
    CHECK(repeat.log.jobs[j].queue == state.log.jobs[j].queue);
  }
}

TEST_CASE("initialization squeezes hidden work into a congested schedule") {
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);
  // Two observed tasks keep the work queue busy from 0.5 to ~10, and the
  // counters demand one hidden task entering inside (0.5, 1.0) whose work
  // departure is pinned into a 1e-7-wide window. Random service draws cannot
  // hit that window, so the zero-service fallback has to.
  ObservedDataset data;
  data.scheme = ObservationScheme{0.5, 0};
  data.num_queues = 2;
  data.total_tasks = 3;
  ObservedTask t0;
  t0.task = 0;
  t0.n0 = 1;
  t0.jobs = {ObservedJob{0, 0, 0, 0.0, 0.5}, ObservedJob{0, 1, 1, 0.5, 10.0}};
  ObservedTask t2;
  t2.task = 2;
  t2.n0 = 3;
  t2.jobs = {ObservedJob{2, 4, 0, 0.0, 1.0}, ObservedJob{2, 5, 1, 1.0, 10.0000001}};
  data.records = {t0, t2};

  PosteriorConfig cfg;
  cfg.seed = 2;
  const SamplerState state = initialize_state(data, net, cfg);

  CHECK(state.log.num_tasks == 3);
  REQUIRE(state.latent.size() == 2);
  const Job* hidden_head = nullptr;
  const Job* hidden_work = nullptr;
  for (JobId j : state.latent) {
    if (state.log.jobs[j].queue == 0) hidden_head = &state.log.jobs[j];
    if (state.log.jobs[j].queue == 1) hidden_work = &state.log.jobs[j];
  }
  REQUIRE(hidden_head != nullptr);
  REQUIRE(hidden_work != nullptr);
  CHECK(hidden_head->d > 0.5);
  CHECK(hidden_head->d < 1.0);
  CHECK(hidden_work->d >= 10.0);
  CHECK(hidden_work->d <= 10.0000001);
  CHECK(hidden_work->s >= 0.0);
  CHECK(hidden_work->s <= 1e-6);
  CHECK(std::isfinite(state.log_density));
}

TEST_CASE("initialization rejects impossible observations") {
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);

  // FCFS overtaking: the later arrival departs first.
  ObservedDataset data;
  data.scheme = ObservationScheme{1.0, 0};
  data.num_queues = 2;
  data.total_tasks = 2;
  ObservedTask t0;
  t0.task = 0;
  t0.n0 = 1;
  t0.jobs = {ObservedJob{0, 0, 0, 0.0, 1.0}, ObservedJob{0, 1, 1, 1.0, 5.0}};
  ObservedTask t1;
  t1.task = 1;
  t1.n0 = 2;
  t1.jobs = {ObservedJob{1, 2, 0, 0.0, 2.0}, ObservedJob{1, 3, 1, 2.0, 4.0}};
  data.records = {t0, t1};
  CHECK_THROWS_AS(initialize_state(data, net, PosteriorConfig{}), std::runtime_error);

  // A hop the network does not allow.
  ObservedDataset loop = data;
  loop.records[1].jobs[1].d = 6.0;
  loop.records[1].jobs.push_back(ObservedJob{1, 4, 0, 6.0, 7.0});  // 1 -> 0 not an edge
  CHECK_THROWS_AS(initialize_state(loop, net, PosteriorConfig{}), std::invalid_argument);

  // Mismatched queue count.
  ObservedDataset wrong = data;
  wrong.records[1].jobs[1].d = 6.0;
  wrong.num_queues = 3;
  CHECK_THROWS_AS(initialize_state(wrong, net, PosteriorConfig{}), std::invalid_argument);
}

TEST_CASE("posterior on complete data reduces to conjugate draws") {
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);
  const Theta theta{1.0, 1.5};
  Rng rng(21);
  const EventLog log = simulate_network(net, theta, ArrivalSpec::poisson(1.0), 40, rng);
  const ObservedDataset data = observe(log, ObservationScheme{1.0, 1});

  double entry_total = 0.0, work_total = 0.0;
  for (const Job& j : log.jobs) {
    (j.queue == 0 ? entry_total : work_total) += j.s;
  }

  PosteriorConfig cfg;
  cfg.sweeps = 1100;
  cfg.burn_in = 100;
  cfg.thin = 1;
  cfg.seed = 77;
  const PosteriorDraws out = run_posterior(data, net, cfg);

  CHECK(out.draws == 1000);
  REQUIRE(out.thetas.size() == 1000);
  CHECK(out.stuck_moves == 0);
  for (char l : out.job_latent) CHECK(l == 0);

  std::vector<double> work_draws, entry_draws;
  for (const Theta& th : out.thetas) {
    entry_draws.push_back(th[0]);
    work_draws.push_back(th[1]);
  }
  const boost::math::gamma_distribution<> work_gamma(40.0, 1.0 / work_total);
  CHECK(ks_pvalue(work_draws, [&](double x) { return boost::math::cdf(work_gamma, x); }) > 0.01);
  const boost::math::gamma_distribution<> entry_gamma(40.0, 1.0 / entry_total);
  CHECK(ks_pvalue(entry_draws, [&](double x) { return boost::math::cdf(entry_gamma, x); }) >
        0.01);

  // With nothing latent the per-job posterior means equal the data.
  REQUIRE(out.mean_service.size() == log.jobs.size());
  for (std::size_t j = 0; j < log.jobs.size(); ++j) {
    CHECK(std::abs(out.mean_service[j] - log.jobs[j].s) <= 1e-9);
  }

  // Deterministic reruns, draw thinning, per-draw collection.
  const PosteriorDraws rerun = run_posterior(data, net, cfg);
  REQUIRE(rerun.thetas.size() == out.thetas.size());
  for (std::size_t i = 0; i < out.thetas.size(); ++i) {
    CHECK(rerun.thetas[i][0] == out.thetas[i][0]);
    CHECK(rerun.thetas[i][1] == out.thetas[i][1]);
  }

  PosteriorConfig thin_cfg = cfg;
  thin_cfg.thin = 10;
  const PosteriorDraws thinned = run_posterior(data, net, thin_cfg);
  CHECK(thinned.draws == 100);

  PosteriorConfig collect_cfg = cfg;
  collect_cfg.sweeps = 60;
  collect_cfg.burn_in = 10;
  collect_cfg.collect_jobs = true;
  const PosteriorDraws collected = run_posterior(data, net, collect_cfg);
  CHECK(collected.draws == 50);
  REQUIRE(collected.services.size() == 50);
  CHECK(collected.services.front().size() == log.jobs.size());
  CHECK(collected.waits.size() == 50);

  PosteriorConfig bad = cfg;
  bad.burn_in = bad.sweeps;
  CHECK_THROWS_AS(run_posterior(data, net, bad), std::invalid_argument);
  bad = cfg;
  bad.thin = 0;
  CHECK_THROWS_AS(run_posterior(data, net, bad), std::invalid_argument);
  bad = cfg;
  bad.burn_in = -1;
  CHECK_THROWS_AS(run_posterior(data, net, bad), std::invalid_argument);
}

TEST_CASE("posterior with hidden tasks stays feasible and near the truth") {
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);
  const Theta theta{1.0, 2.0};
  Rng rng(31);
  const EventLog log = simulate_network(net, theta, ArrivalSpec::poisson(1.0), 60, rng);
  const ObservedDataset data = observe(log, ObservationScheme{0.5, 4});
  const int hidden = 60 - static_cast<int>(data.records.size());
  REQUIRE(hidden >= 10);

  PosteriorConfig cfg;
  cfg.sweeps = 500;
  cfg.burn_in = 100;
  cfg.seed = 9;
  const PosteriorDraws out = run_posterior(data, net, cfg);

  CHECK(out.draws == 400);
  std::vector<double> work_draws;
  for (const Theta& th : out.thetas) {
    REQUIRE(std::isfinite(th[0]));
    REQUIRE(std::isfinite(th[1]));
    work_draws.push_back(th[1]);
  }
  const double post_mean = mean_of(work_draws);
  CHECK(post_mean > 1.0);
  CHECK(post_mean < 3.4);

  // The final trajectory is feasible and observed departures survived intact.
  EventLog final_copy = out.last_log;
  CHECK(try_recover_services(net, final_copy));
  int flagged = 0;
  for (char l : out.job_latent) flagged += l;
  CHECK(flagged == 2 * hidden);
  for (const ObservedTask& rec : data.records) {
    for (const ObservedJob& oj : rec.jobs) {
      const bool present =
          std::any_of(out.last_log.jobs.begin(), out.last_log.jobs.end(), [&](const Job& j) {
            return j.queue == oj.queue && j.d == oj.d && !out.job_latent[j.id];
          });
      CHECK(present);
    }
  }
}

TEST_CASE("stochastic EM hits the complete-data estimate immediately") {
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);
  const Theta theta{1.0, 1.5};
  Rng rng(41);
  const EventLog log = simulate_network(net, theta, ArrivalSpec::poisson(1.0), 10, rng);
  const ObservedDataset data = observe(log, ObservationScheme{1.0, 2});

  PosteriorConfig cfg;
  cfg.sweeps = 5;
  cfg.seed = 6;
  const std::vector<Theta> path = stochastic_em(data, net, cfg);
  REQUIRE(path.size() == 5);

  const SamplerState state = initialize_state(data, net, cfg);
  double n0 = 0, s0 = 0, n1 = 0, s1 = 0;
  for (const Job& j : state.log.jobs) {
    if (j.queue == 0) {
      n0 += 1;
      s0 += j.s;
    } else {
      n1 += 1;
      s1 += j.s;
    }
  }
  for (const Theta& th : path) {
    CHECK(th[0] == n0 / s0);
    CHECK(th[1] == n1 / s1);
  }

  PosteriorConfig bad = cfg;
  bad.sweeps = 0;
  CHECK_THROWS_AS(stochastic_em(data, net, bad), std::invalid_argument);
}

TEST_CASE("joint kernel leaves the generative distribution invariant") {
  const queuenet::testing::GewekeOutcome out =
      queuenet::testing::geweke_compare(Discipline::Fcfs, 1, 12, 1200, 2, 18);
  CHECK(out.p_mean_service > 0.01);
  CHECK(out.p_max_departure > 0.01);
  CHECK(out.p_theta > 0.01);
}

}  // TEST_SUITE
