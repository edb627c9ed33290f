#include "queuenet/sampler_state.hpp"

#include <stdexcept>
#include <string>
#include <utility>

#include "queuenet/likelihood.hpp"
#include "queuenet/simulate.hpp"

namespace queuenet {

void SamplerState::rebuild_indexes() {
  events.build(net, log);
  intervals.build(net, log);
}

void SamplerState::refresh_log_density() {
  log_density = log_joint_stored(net, theta, log, events);
}

SamplerState make_sampler_state(const NetworkConfig& net, Theta theta, EventLog log,
                                std::vector<JobId> latent, std::uint64_t seed) {
  if (auto errors = validate_network(net); !errors.empty()) {
    throw std::invalid_argument("invalid network: " + errors.front());
  }
  if (static_cast<int>(theta.size()) != net.num_queues()) {
    throw std::invalid_argument("theta must have one rate per queue");
  }
  recover_services(net, log);

  SamplerState state;
  state.net = net;
  state.theta = std::move(theta);
  state.log = std::move(log);
  state.is_latent.assign(state.log.jobs.size(), 0);
  for (JobId id : latent) {
    if (id < 0 || id >= static_cast<JobId>(state.log.jobs.size())) {
      throw std::invalid_argument("latent job id " + std::to_string(id) + " out of range");
    }
    if (state.is_latent[id]) {
      throw std::invalid_argument("latent job id " + std::to_string(id) + " listed twice");
    }
    state.is_latent[id] = 1;
  }
  state.latent = std::move(latent);
  state.rng = Rng(seed);
  state.rebuild_indexes();
  state.refresh_log_density();
  return state;
}

}  // namespace queuenet
