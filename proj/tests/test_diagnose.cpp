#include "queuenet/diagnose.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "queuenet/observe.hpp"
#include "queuenet/simulate.hpp"
#include "test_support.hpp"

using namespace queuenet;
using queuenet::testing::single_queue_net;
using queuenet::testing::tandem_net;

namespace {

// Three tasks through one FCFS work queue. Entries 0.5, 1.0, 5.0; exits
// 2.0, 3.5, 5.5. The FCFS recursion gives services 1.5, 1.5, 0.5 and
// waits 0, 1.0, 0.
ObservedDataset hand_dataset() {
  ObservedDataset data;
  data.scheme = ObservationScheme{1.0, 0};
  data.num_queues = 2;
  data.total_tasks = 3;
  ObservedTask t0;
  t0.task = 0;
  t0.n0 = 1;
  t0.jobs = {ObservedJob{0, 0, 0, 0.0, 0.5}, ObservedJob{0, 1, 1, 0.5, 2.0}};
  ObservedTask t1;
  t1.task = 1;
  t1.n0 = 2;
  t1.jobs = {ObservedJob{1, 2, 0, 0.0, 1.0}, ObservedJob{1, 3, 1, 1.0, 3.5}};
  ObservedTask t2;
  t2.task = 2;
  t2.n0 = 3;
  t2.jobs = {ObservedJob{2, 4, 0, 0.0, 5.0}, ObservedJob{2, 5, 1, 5.0, 5.5}};
  data.records = {t0, t1, t2};
  return data;
}

int populated_work_cells(const Diagnosis& diag) {
  int n = 0;
  for (const auto& row : diag.cells) {
    for (std::size_t q = 1; q < row.size(); ++q) {
      if (row[q].has_value) ++n;
    }
  }
  return n;
}

bool grids_identical(const Diagnosis& x, const Diagnosis& y) {
  if (x.t_lo != y.t_lo || x.t_hi != y.t_hi || x.cells.size() != y.cells.size()) return false;
  for (std::size_t b = 0; b < x.cells.size(); ++b) {
    if (x.cells[b].size() != y.cells[b].size()) return false;
    for (std::size_t q = 0; q < x.cells[b].size(); ++q) {
      const DiagnosisCell& cx = x.cells[b][q];
      const DiagnosisCell& cy = y.cells[b][q];
      if (cx.jobs != cy.jobs || cx.has_value != cy.has_value) return false;
      if (cx.has_value &&
          (cx.mean_service != cy.mean_service || cx.mean_wait != cy.mean_wait)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("diagnose") {

TEST_CASE("hand grid: bins, means, and the entry column") {
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);
  const ObservedDataset data = hand_dataset();

  DiagnoseConfig cfg;
  cfg.bins = 3;
  cfg.t_hi = 6.0;
  cfg.sampler.sweeps = 20;
  cfg.sampler.burn_in = 5;
  cfg.sampler.seed = 4;
  const Diagnosis diag = diagnose(data, net, cfg);

  REQUIRE(diag.cells.size() == 3);
  REQUIRE(diag.cells[0].size() == 2);
  CHECK(diag.t_lo == 0.0);
  CHECK(diag.t_hi == 6.0);

  // The entry queue's pseudo-jobs never contribute.
  for (const auto& row : diag.cells) {
    CHECK(!row[0].has_value);
    CHECK(row[0].jobs == 0);
    CHECK(std::isnan(row[0].mean_service));
  }

  // Bin [0, 2): tasks 0 and 1. Bin [2, 4): nobody. Bin [4, 6): task 2.
  const DiagnosisCell& b0 = diag.cells[0][1];
  CHECK(b0.has_value);
  CHECK(b0.jobs == 2);
  CHECK(std::abs(b0.mean_service - 1.5) <= 1e-12);
  CHECK(std::abs(b0.mean_wait - 0.5) <= 1e-12);

  CHECK(!diag.cells[1][1].has_value);
  CHECK(std::isnan(diag.cells[1][1].mean_service));
  CHECK(std::isnan(diag.cells[1][1].mean_wait));

  const DiagnosisCell& b2 = diag.cells[2][1];
  CHECK(b2.has_value);
  CHECK(b2.jobs == 1);
  CHECK(std::abs(b2.mean_service - 0.5) <= 1e-12);
  CHECK(std::abs(b2.mean_wait - 0.0) <= 1e-12);

  // Default edge: the latest recorded departure.
  DiagnoseConfig derived = cfg;
  derived.t_hi = 0.0;
  CHECK(diagnose(data, net, derived).t_hi == 5.5);
}

TEST_CASE("wait-zero baseline grids responses and honors bin edges") {
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);
  ObservedDataset data = hand_dataset();
  // Task entering exactly at the upper edge lands in the last bin; one past
  // the edge is dropped.
  ObservedTask t3;
  t3.task = 3;
  t3.n0 = 4;
  t3.jobs = {ObservedJob{3, 6, 0, 0.0, 6.0}, ObservedJob{3, 7, 1, 6.0, 6.2}};
  ObservedTask t4;
  t4.task = 4;
  t4.n0 = 5;
  t4.jobs = {ObservedJob{4, 8, 0, 0.0, 6.5}, ObservedJob{4, 9, 1, 6.5, 6.6}};
  data.records.push_back(t3);
  data.records.push_back(t4);
  data.total_tasks = 5;

  const Diagnosis wz = diagnose_wait_zero(data, net, 3, 6.0);
  REQUIRE(wz.cells.size() == 3);

  // Whole response counted as processing: (1.5 + 2.5) / 2 in the first bin.
  const DiagnosisCell& b0 = wz.cells[0][1];
  CHECK(b0.jobs == 2);
  CHECK(std::abs(b0.mean_service - 2.0) <= 1e-12);
  CHECK(std::abs(b0.mean_wait - 0.0) <= 1e-12);

  // Last bin holds task 2 (entry 5.0) and task 3 (entry 6.0 == edge);
  // task 4 at 6.5 is outside the grid.
  const DiagnosisCell& b2 = wz.cells[2][1];
  CHECK(b2.jobs == 2);
  CHECK(std::abs(b2.mean_service - 0.5 * (0.5 + 0.2)) <= 1e-12);
  CHECK(!wz.cells[1][1].has_value);
}

TEST_CASE("full observation reproduces the reference exactly") {
  const NetworkConfig net =
      tandem_net({QueueConfig{Discipline::Ps, 1}, QueueConfig{Discipline::Ps, 1}});
  const Theta theta{1.0, 4.0, 1.6};
  Rng rng(29);
  const EventLog log = simulate_network(net, theta, ArrivalSpec::poisson(1.0), 30, rng);
  const ObservedDataset data = observe(log, ObservationScheme{1.0, 2});

  DiagnoseConfig cfg;
  cfg.bins = 8;
  cfg.t_hi = 40.0;
  cfg.sampler.sweeps = 60;
  cfg.sampler.burn_in = 10;
  cfg.sampler.thin = 2;
  cfg.sampler.seed = 9;
  const Diagnosis ref = diagnose(data, net, cfg);

  // Nothing is latent, so the sampler seed cannot move any estimate.
  DiagnoseConfig other = cfg;
  other.sampler.seed = 123;
  const Diagnosis again = diagnose(data, net, other);
  CHECK(grids_identical(ref, again));
  CHECK(diagnosis_rmse(again, ref) == 0.0);

  // Point reconstruction from the EM final state agrees with the posterior
  // means up to accumulation roundoff.
  DiagnoseConfig em = cfg;
  em.use_em = true;
  const Diagnosis em_grid = diagnose(data, net, em);
  CHECK(diagnosis_rmse(em_grid, ref) <= 1e-12);

  // Every task contributes its two work-queue jobs.
  int total_jobs = 0;
  for (const auto& row : ref.cells) {
    CHECK(!row[0].has_value);
    for (std::size_t q = 1; q < row.size(); ++q) total_jobs += row[q].jobs;
  }
  CHECK(total_jobs == 2 * log.num_tasks);
}

TEST_CASE("wait-zero baseline overstates service under load") {
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);
  const Theta theta{0.8, 1.0};
  Rng rng(17);
  const EventLog log = simulate_network(net, theta, ArrivalSpec::poisson(0.8), 60, rng);
  const ObservedDataset data = observe(log, ObservationScheme{1.0, 5});

  DiagnoseConfig cfg;
  cfg.bins = 10;
  cfg.sampler.sweeps = 40;
  cfg.sampler.burn_in = 10;
  cfg.sampler.seed = 1;
  const Diagnosis ref = diagnose(data, net, cfg);
  const Diagnosis wz = diagnose_wait_zero(data, net, cfg.bins, ref.t_hi);

  for (std::size_t b = 0; b < ref.cells.size(); ++b) {
    const DiagnosisCell& r = ref.cells[b][1];
    const DiagnosisCell& z = wz.cells[b][1];
    CHECK(r.has_value == z.has_value);
    if (!r.has_value) continue;
    CHECK(z.jobs == r.jobs);
    CHECK(z.mean_service >= r.mean_service - 1e-12);
    CHECK(z.mean_wait == 0.0);
  }
  CHECK(diagnosis_rmse(wz, ref) > 0.0);
}

TEST_CASE("more observation means better reconstruction") {
  const NetworkConfig net =
      tandem_net({QueueConfig{Discipline::Ps, 1}, QueueConfig{Discipline::Ps, 1}});
  // Light first tier, second tier pushed toward saturation by a mid-run
  // surge in the workload.
  const Theta theta{1.0, 5.0, 1.2};
  const ArrivalSpec ramp = ArrivalSpec::piecewise({0.0, 15.0, 30.0}, {0.4, 0.9, 0.4});
  Rng rng(31);
  const EventLog log = simulate_network(net, theta, ramp, 70, rng);

  const ObservedDataset full = observe(log, ObservationScheme{1.0, 1});
  const ObservedDataset half = observe(log, ObservationScheme{0.5, 7});
  const ObservedDataset quarter = observe(log, ObservationScheme{0.25, 11});
  REQUIRE(half.records.size() < full.records.size());
  REQUIRE(quarter.records.size() < half.records.size());

  double t_hi = 0.0;
  for (const ObservedTask& rec : full.records) {
    for (const ObservedJob& job : rec.jobs) t_hi = std::max(t_hi, job.d);
  }

  DiagnoseConfig cfg;
  cfg.bins = 10;
  cfg.t_hi = t_hi;
  cfg.sampler.sweeps = 400;
  cfg.sampler.burn_in = 100;
  cfg.sampler.thin = 3;
  cfg.sampler.seed = 3;
  const Diagnosis ref = diagnose(full, net, cfg);
  const Diagnosis from_half = diagnose(half, net, cfg);
  const Diagnosis from_quarter = diagnose(quarter, net, cfg);
  const Diagnosis wz = diagnose_wait_zero(full, net, cfg.bins, t_hi);

  CHECK(populated_work_cells(from_half) > 0);
  CHECK(populated_work_cells(from_quarter) > 0);

  const double err_half = diagnosis_rmse(from_half, ref);
  const double err_quarter = diagnosis_rmse(from_quarter, ref);
  const double err_wz = diagnosis_rmse(wz, ref);
  CHECK(err_half > 0.0);
  CHECK(err_quarter > 0.0);
  CHECK(err_half < err_quarter);
  CHECK(err_half < err_wz);
}

TEST_CASE("EM path is deterministic on partial data") {
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);
  const Theta theta{1.0, 1.5};
  Rng rng(23);
  const EventLog log = simulate_network(net, theta, ArrivalSpec::poisson(0.7), 40, rng);
  const ObservedDataset data = observe(log, ObservationScheme{0.5, 13});
  REQUIRE(!data.records.empty());

  DiagnoseConfig cfg;
  cfg.bins = 6;
  cfg.t_hi = 80.0;
  cfg.use_em = true;
  cfg.sampler.sweeps = 50;
  cfg.sampler.seed = 2;
  const Diagnosis a = diagnose(data, net, cfg);
  const Diagnosis b = diagnose(data, net, cfg);
  CHECK(grids_identical(a, b));
  CHECK(populated_work_cells(a) > 0);
}

TEST_CASE("malformed inputs are rejected") {
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);
  const ObservedDataset data = hand_dataset();

  ObservedDataset empty;
  empty.scheme = ObservationScheme{0.0, 0};
  empty.num_queues = 2;
  empty.total_tasks = 0;
  CHECK_THROWS_AS(diagnose(empty, net, DiagnoseConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(diagnose_wait_zero(empty, net, 10), std::invalid_argument);

  DiagnoseConfig zero_bins;
  zero_bins.bins = 0;
  CHECK_THROWS_AS(diagnose(data, net, zero_bins), std::invalid_argument);

  ObservedDataset mismatched = data;
  mismatched.num_queues = 3;
  CHECK_THROWS_AS(diagnose(mismatched, net, DiagnoseConfig{}), std::invalid_argument);

  DiagnoseConfig em_none;
  em_none.use_em = true;
  em_none.sampler.sweeps = 0;
  CHECK_THROWS_AS(diagnose(data, net, em_none), std::invalid_argument);

  // Grid shape and span mismatches.
  const Diagnosis three_bins = diagnose_wait_zero(data, net, 3, 6.0);
  const Diagnosis four_bins = diagnose_wait_zero(data, net, 4, 6.0);
  const Diagnosis short_span = diagnose_wait_zero(data, net, 3, 5.5);
  CHECK_THROWS_AS(diagnosis_rmse(three_bins, four_bins), std::invalid_argument);
  CHECK_THROWS_AS(diagnosis_rmse(three_bins, short_span), std::invalid_argument);

  // Same shape but disjoint occupancy: no cell to compare.
  ObservedDataset early = data;
  early.records.resize(2);
  early.total_tasks = 2;
  ObservedDataset late;
  late.scheme = data.scheme;
  late.num_queues = 2;
  late.total_tasks = 1;
  ObservedTask only = data.records[2];
  only.n0 = 1;
  late.records = {only};
  const Diagnosis g_early = diagnose_wait_zero(early, net, 3, 6.0);
  const Diagnosis g_late = diagnose_wait_zero(late, net, 3, 6.0);
  CHECK_THROWS_AS(diagnosis_rmse(g_early, g_late), std::runtime_error);
}

}  // TEST_SUITE
