#include <algorithm>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "queuenet/observe.hpp"
#include "queuenet/rng.hpp"
#include "queuenet/simulate.hpp"
#include "test_support.hpp"

using namespace queuenet;
using queuenet::testing::single_queue_net;
using queuenet::testing::tandem_net;

namespace {

ObservedDataset two_task_dataset() {
  ObservedDataset data;
  data.scheme = ObservationScheme{1.0, 0};
  data.num_queues = 2;
  data.total_tasks = 2;
  ObservedTask t0;
  t0.task = 0;
  t0.n0 = 1;
  t0.jobs = {ObservedJob{0, 0, 0, 0.0, 1.0}, ObservedJob{0, 1, 1, 1.0, 3.0}};
  ObservedTask t1;
  t1.task = 1;
  t1.n0 = 2;
  t1.jobs = {ObservedJob{1, 2, 0, 0.0, 2.0}, ObservedJob{1, 3, 1, 2.0, 6.0}};
  data.records = {t0, t1};
  return data;
}

}  // namespace

TEST_SUITE("observe") {

TEST_CASE("full logging keeps every task with cumulative counters") {
  const NetworkConfig net =
      tandem_net({QueueConfig{Discipline::Fcfs, 1}, QueueConfig{Discipline::Ps, 1}});
  Rng rng(7);
  const Theta theta{1.0, 1.4, 1.2};
  const EventLog log = simulate_network(net, theta, ArrivalSpec::poisson(1.0), 6, rng);

  const ObservedDataset data = observe(log, ObservationScheme{1.0, 3});
  REQUIRE(data.records.size() == 6);
  CHECK(data.total_tasks == 6);
  CHECK(data.num_queues == 3);
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const ObservedTask& rec = data.records[i];
    CHECK(rec.n0 == static_cast<int>(i) + 1);
    REQUIRE(rec.jobs.size() == 3);
    CHECK(rec.jobs.front().queue == 0);
    CHECK(rec.jobs.front().a == 0.0);
    for (std::size_t h = 1; h < rec.jobs.size(); ++h) {
      CHECK(rec.jobs[h].a == rec.jobs[h - 1].d);
    }
    if (i > 0) {
      CHECK(data.records[i - 1].jobs.front().d <= rec.jobs.front().d);
    }
  }
  CHECK(validate_dataset(data).empty());
}

TEST_CASE("zero probability yields an empty record set") {
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);
  Rng rng(5);
  const EventLog log =
      simulate_network(net, Theta{1.0, 2.0}, ArrivalSpec::poisson(1.0), 6, rng);
  const ObservedDataset data = observe(log, ObservationScheme{0.0, 5});
  CHECK(data.records.empty());
  CHECK(data.total_tasks == 6);
  CHECK(validate_dataset(data).empty());
  CHECK(mean_observed_response(data) == 0.0);
}

TEST_CASE("partial logging records the inclusive entry counter") {
  const NetworkConfig net = single_queue_net(Discipline::Fcfs);
  Rng rng(11);
  const EventLog log =
      simulate_network(net, Theta{1.0, 2.0}, ArrivalSpec::poisson(1.0), 4, rng);

  // Pick a seed whose coin flips keep exactly the first and third tasks.
  std::uint64_t pick = 0;
  bool found = false;
  for (std::uint64_t s = 1; s < 500 && !found; ++s) {
    Rng mask(s);
    const bool b0 = mask.bernoulli(0.5);
    const bool b1 = mask.bernoulli(0.5);
    const bool b2 = mask.bernoulli(0.5);
    const bool b3 = mask.bernoulli(0.5);
    if (b0 && !b1 && b2 && !b3) {
      pick = s;
      found = true;
    }
  }
  REQUIRE(found);

  const ObservedDataset data = observe(log, ObservationScheme{0.5, pick});
  REQUIRE(data.records.size() == 2);
  CHECK(data.records[0].n0 == 1);
  CHECK(data.records[1].n0 == 3);
  CHECK(data.total_tasks == 4);
  CHECK(validate_dataset(data).empty());

  // Recorded times are lifted from the log without modification.
  for (const ObservedTask& rec : data.records) {
    for (const ObservedJob& oj : rec.jobs) {
      const bool present = std::any_of(log.jobs.begin(), log.jobs.end(), [&](const Job& j) {
        return j.task == rec.task && j.queue == oj.queue && j.a == oj.a && j.d == oj.d;
      });
      CHECK(present);
    }
  }

  const ObservedDataset again = observe(log, ObservationScheme{0.5, pick});
  REQUIRE(again.records.size() == data.records.size());
  for (std::size_t i = 0; i < again.records.size(); ++i) {
    CHECK(again.records[i].task == data.records[i].task);
    CHECK(again.records[i].jobs.front().d == data.records[i].jobs.front().d);
  }

  CHECK_THROWS_AS(observe(log, ObservationScheme{1.5, 0}), std::invalid_argument);
  CHECK_THROWS_AS(observe(log, ObservationScheme{-0.1, 0}), std::invalid_argument);
}

TEST_CASE("mean response averages recorded non-entry jobs") {
  const ObservedDataset data = two_task_dataset();
  CHECK(mean_observed_response(data) == 3.0);  // responses 2 and 4
}

TEST_CASE("validation flags counter and chain violations") {
  CHECK(validate_dataset(two_task_dataset()).empty());

  ObservedDataset bad = two_task_dataset();
  bad.records[1].n0 = 1;  // counter must strictly increase
  CHECK_FALSE(validate_dataset(bad).empty());

  bad = two_task_dataset();
  bad.records[1].jobs[1].a = 1.9;  // chain break: hop arrival != previous departure
  CHECK_FALSE(validate_dataset(bad).empty());

  bad = two_task_dataset();
  bad.records[0].jobs[1].queue = 7;  // out of range
  CHECK_FALSE(validate_dataset(bad).empty());

  bad = two_task_dataset();
  bad.records[0].jobs[1].d = 0.5;  // departs before arriving
  CHECK_FALSE(validate_dataset(bad).empty());

  bad = two_task_dataset();
  bad.total_tasks = 1;  // fewer tasks than records
  CHECK_FALSE(validate_dataset(bad).empty());

  bad = two_task_dataset();
  bad.records[0].jobs.clear();  // record without jobs
  CHECK_FALSE(validate_dataset(bad).empty());
}

}  // TEST_SUITE
