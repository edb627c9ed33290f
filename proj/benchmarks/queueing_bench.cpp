// Throughput benchmarks for the hot paths: forward simulation, service
// recovery, whole-trajectory density evaluation, incremental single-move
// proposals, and the two MCMC kernels.

#include <benchmark/benchmark.h>

#include <vector>

#include "queuenet/likelihood.hpp"
#include "queuenet/observe.hpp"
#include "queuenet/propagate.hpp"
#include "queuenet/rng.hpp"
#include "queuenet/sampler.hpp"
#include "queuenet/simulate.hpp"

namespace {

using namespace queuenet;

NetworkConfig tandem_mixed() {
  NetworkConfig net;
  net.queues = {QueueConfig{Discipline::Fcfs, 1}, QueueConfig{Discipline::Fcfs, 2},
                QueueConfig{Discipline::Rss, 1}, QueueConfig{Discipline::Ps, 1}};
  net.successors = {{1}, {2}, {3}, {kFinalQueue}};
  net.initial_queue = 0;
  return net;
}

const Theta kTheta{1.0, 2.5, 2.0, 3.0};

EventLog make_log(int tasks, std::uint64_t seed) {
  Rng rng(seed);
  return simulate_network(tandem_mixed(), kTheta, ArrivalSpec::poisson(1.0), tasks, rng);
}

// The latent-chain fixtures skip the random-selection stage: thinned records
// of that discipline can show idle gaps that only hidden traffic could fill,
// which the initialization feasibility screen rejects.
NetworkConfig tandem_smooth() {
  NetworkConfig net;
  net.queues = {QueueConfig{Discipline::Fcfs, 1}, QueueConfig{Discipline::Fcfs, 2},
                QueueConfig{Discipline::Ps, 1}};
  net.successors = {{1}, {2}, {kFinalQueue}};
  net.initial_queue = 0;
  return net;
}

const Theta kThetaSmooth{1.0, 2.5, 3.0};

SamplerState make_state(int tasks, double p, std::uint64_t seed) {
  const NetworkConfig net = tandem_smooth();
  Rng rng(seed);
  const EventLog log =
      simulate_network(net, kThetaSmooth, ArrivalSpec::poisson(1.0), tasks, rng);
  const ObservedDataset data = observe(log, ObservationScheme{p, seed + 1});
  PosteriorConfig cfg;
  cfg.seed = seed + 2;
  return initialize_state(data, net, cfg);
}

void BM_SimulateNetwork(benchmark::State& state) {
  const NetworkConfig net = tandem_mixed();
  const int tasks = static_cast<int>(state.range(0));
  Rng rng(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate_network(net, kTheta, ArrivalSpec::poisson(1.0), tasks, rng));
  }
  state.SetItemsProcessed(state.iterations() * tasks);
}
BENCHMARK(BM_SimulateNetwork)->Arg(100)->Arg(1000);

void BM_RecoverServices(benchmark::State& state) {
  const NetworkConfig net = tandem_mixed();
  const EventLog log = make_log(static_cast<int>(state.range(0)), 11);
  for (auto _ : state) {
    EventLog scratch = log;
    recover_services(net, scratch);
    benchmark::DoNotOptimize(scratch);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(log.jobs.size()));
}
BENCHMARK(BM_RecoverServices)->Arg(100)->Arg(1000);

void BM_LogJoint(benchmark::State& state) {
  const NetworkConfig net = tandem_mixed();
  const EventLog log = make_log(static_cast<int>(state.range(0)), 13);
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_joint(net, kTheta, log));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(log.jobs.size()));
}
BENCHMARK(BM_LogJoint)->Arg(100)->Arg(1000);

// One staged single-departure evaluation; the call restores the state before
// returning, so each iteration sees the same configuration.
void BM_ProposeDeparture(benchmark::State& state) {
  SamplerState st = make_state(200, 0.5, 17);
  const std::vector<JobId> latent = st.latent;
  std::size_t i = 0;
  Rng jitter(3);
  for (auto _ : state) {
    const JobId e = latent[i++ % latent.size()];
    const Job& job = st.log.jobs[e];
    const double d_new = job.d + 0.01 * (jitter.uniform() - 0.5);
    StagedUpdate update = propose_departure_change(st, e, d_new);
    benchmark::DoNotOptimize(update.delta);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ProposeDeparture);

void BM_SliceSweep(benchmark::State& state) {
  SamplerState st = make_state(static_cast<int>(state.range(0)), 0.5, 19);
  const SliceConfig slice{1.0, 16, 64};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sweep(st, slice));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(st.latent.size()));
}
BENCHMARK(BM_SliceSweep)->Arg(50)->Arg(200);

void BM_GibbsTheta(benchmark::State& state) {
  SamplerState st = make_state(200, 0.5, 23);
  for (auto _ : state) {
    gibbs_theta(st);
    benchmark::DoNotOptimize(st.theta);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GibbsTheta);

}  // namespace

BENCHMARK_MAIN();
