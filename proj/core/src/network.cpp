#include "queuenet/types.hpp"

#include <algorithm>
#include <cctype>
#include <queue>
#include <set>

namespace queuenet {

std::string to_string(Discipline d) {
  switch (d) {
    case Discipline::Fcfs: return "fcfs";
    case Discipline::Rss: return "rss";
    case Discipline::Ps: return "ps";
  }
  return "fcfs";
}

bool discipline_from_string(const std::string& text, Discipline& out) {
  std::string t;
  t.reserve(text.size());
  for (char c : text) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "fcfs") {
    out = Discipline::Fcfs;
  } else if (t == "rss") {
    out = Discipline::Rss;
  } else if (t == "ps") {
    out = Discipline::Ps;
  } else {
    return false;
  }
  return true;
}

std::vector<std::string> validate_network(const NetworkConfig& net) {
  std::vector<std::string> errors;
  const int q = net.num_queues();
  if (q < 1) {
    errors.push_back("network must have at least one queue");
    return errors;
  }
  if (static_cast<int>(net.successors.size()) != q) {
    errors.push_back("successors must have one entry per queue");
    return errors;
  }
  if (net.initial_queue < 0 || net.initial_queue >= q) {
    errors.push_back("initial queue id out of range");
    return errors;
  }
  if (net.max_path_length < 0) {
    errors.push_back("max_path_length must be >= 0");
  }
  const QueueConfig& q0 = net.queues[net.initial_queue];
  if (q0.discipline != Discipline::Fcfs || q0.processors != 1) {
    errors.push_back("initial queue must be FCFS with one processor");
  }
  for (int i = 0; i < q; ++i) {
    const QueueConfig& cfg = net.queues[i];
    if (cfg.processors < 1) {
      errors.push_back("queue " + std::to_string(i) + ": processors must be >= 1");
    }
    if (cfg.discipline != Discipline::Fcfs && cfg.processors != 1) {
      errors.push_back("queue " + std::to_string(i) +
                       ": multiple processors are only supported for FCFS");
    }
    if (net.successors[i].empty()) {
      errors.push_back("queue " + std::to_string(i) + ": successor list is empty");
      continue;
    }
    std::set<QueueId> seen;
    for (QueueId next : net.successors[i]) {
      if (next != kFinalQueue && (next < 0 || next >= q)) {
        errors.push_back("queue " + std::to_string(i) + ": successor id " +
                         std::to_string(next) + " out of range");
        continue;
      }
      if (next == net.initial_queue) {
        errors.push_back("queue " + std::to_string(i) + ": initial queue cannot be a successor");
      }
      if (!seen.insert(next).second) {
        errors.push_back("queue " + std::to_string(i) + ": duplicate successor " +
                         std::to_string(next));
      }
    }
  }
  if (!errors.empty()) return errors;

  // Every queue reachable from q0 must be able to reach the exit; otherwise
  // tasks can be trapped in a cycle with no way out.
  std::vector<char> reaches_exit(q, 0);
  // Fixed point over the reversed "can reach exit" relation.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < q; ++i) {
      if (reaches_exit[i]) continue;
      for (QueueId next : net.successors[i]) {
        if (next == kFinalQueue || reaches_exit[next]) {
          reaches_exit[i] = 1;
          changed = true;
          break;
        }
      }
    }
  }
  std::vector<char> reachable(q, 0);
  std::queue<int> frontier;
  frontier.push(net.initial_queue);
  reachable[net.initial_queue] = 1;
  while (!frontier.empty()) {
    const int at = frontier.front();
    frontier.pop();
    for (QueueId next : net.successors[at]) {
      if (next == kFinalQueue || reachable[next]) continue;
      reachable[next] = 1;
      frontier.push(next);
    }
  }
  for (int i = 0; i < q; ++i) {
    if (reachable[i] && !reaches_exit[i]) {
      errors.push_back("queue " + std::to_string(i) + ": exit is unreachable from this queue");
    }
  }
  return errors;
}

ResponseDecomposition decompose_response(const Job& job) {
  ResponseDecomposition out;
  out.waiting = job.u - job.a;
  out.service = job.d - job.u;
  out.response = out.waiting + out.service;
  return out;
}

}  // namespace queuenet
