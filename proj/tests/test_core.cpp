#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "queuenet/rng.hpp"
#include "queuenet/types.hpp"
#include "test_support.hpp"

using namespace queuenet;

namespace {

bool mentions(const std::vector<std::string>& errors, const std::string& needle) {
  return std::any_of(errors.begin(), errors.end(), [&](const std::string& e) {
    return e.find(needle) != std::string::npos;
  });
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("validate_network accepts a three-tier fan network") {
  NetworkConfig net;
  net.queues.assign(6, QueueConfig{Discipline::Fcfs, 1});
  net.queues[3] = QueueConfig{Discipline::Ps, 1};
  net.queues[5] = QueueConfig{Discipline::Rss, 1};
  net.successors = {
      {1, 2},           // q0 fans to tier 1
      {3, 4},           {3, 4},
      {5},              {5},
      {kFinalQueue},
  };
  net.initial_queue = 0;
  CHECK(validate_network(net).empty());
}

TEST_CASE("validate_network reports an unreachable exit") {
  NetworkConfig net = testing::single_queue_net(Discipline::Fcfs);
  net.successors[1] = {1};  // self loop, exit never drawn
  const auto errors = validate_network(net);
  REQUIRE(!errors.empty());
  CHECK(mentions(errors, "exit is unreachable"));
}

TEST_CASE("validate_network requires a single-processor FCFS initial queue") {
  NetworkConfig net = testing::single_queue_net(Discipline::Fcfs);
  net.queues[0].discipline = Discipline::Ps;
  CHECK(mentions(validate_network(net), "initial queue must be FCFS"));

  net = testing::single_queue_net(Discipline::Fcfs);
  net.queues[0].processors = 2;
  CHECK(mentions(validate_network(net), "initial queue must be FCFS"));
}

TEST_CASE("validate_network flags malformed successor lists") {
  NetworkConfig net = testing::single_queue_net(Discipline::Fcfs);
  net.successors[1] = {};
  CHECK(mentions(validate_network(net), "successor list is empty"));

  net = testing::single_queue_net(Discipline::Fcfs);
  net.successors[1] = {7};
  CHECK(mentions(validate_network(net), "out of range"));

  net = testing::single_queue_net(Discipline::Fcfs);
  net.successors[1] = {0};
  CHECK(mentions(validate_network(net), "initial queue cannot be a successor"));

  net = testing::single_queue_net(Discipline::Fcfs);
  net.successors[0] = {1, 1};
  CHECK(mentions(validate_network(net), "duplicate successor"));
}

TEST_CASE("validate_network flags multi-processor RSS and PS queues") {
  NetworkConfig net = testing::single_queue_net(Discipline::Rss, 2);
  CHECK(mentions(validate_network(net), "only supported for FCFS"));
}

TEST_CASE("decompose_response splits waiting and service") {
  Job job;
  job.a = 0.0;
  job.u = 0.0;
  job.d = 2.0;
  auto dec = decompose_response(job);
  CHECK(dec.response == 2.0);
  CHECK(dec.waiting == 0.0);
  CHECK(dec.service == 2.0);

  job.a = 1.0;
  job.u = 3.0;
  job.d = 4.0;
  dec = decompose_response(job);
  CHECK(dec.response == 3.0);
  CHECK(dec.waiting == 2.0);
  CHECK(dec.service == 1.0);
}

TEST_CASE("decompose_response identity r = w + s is exact for arbitrary times") {
  Rng rng(20240817);
  for (int i = 0; i < 1000; ++i) {
    Job job;
    job.a = rng.uniform(0.0, 100.0);
    job.u = job.a + rng.exponential(0.3);
    job.d = job.u + rng.exponential(0.7);
    const auto dec = decompose_response(job);
    CHECK(dec.response == dec.waiting + dec.service);  // bitwise, not approximate
  }
}

TEST_CASE("discipline names round trip") {
  for (Discipline d : {Discipline::Fcfs, Discipline::Rss, Discipline::Ps}) {
    Discipline back;
    REQUIRE(discipline_from_string(to_string(d), back));
    CHECK(back == d);
  }
  Discipline out;
  CHECK(!discipline_from_string("lifo", out));
}

TEST_CASE("max path length defaults to ten times the queue count") {
  NetworkConfig net = testing::single_queue_net(Discipline::Fcfs);
  CHECK(net.effective_max_path_length() == 20);
  net.max_path_length = 7;
  CHECK(net.effective_max_path_length() == 7);
}

}  // TEST_SUITE
