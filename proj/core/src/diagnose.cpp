#include "queuenet/diagnose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace queuenet {

namespace {

double latest_recorded_departure(const ObservedDataset& data) {
  double t = 0.0;
  for (const ObservedTask& rec : data.records) {
    for (const ObservedJob& job : rec.jobs) t = std::max(t, job.d);
  }
  return t;
}

void check_inputs(const ObservedDataset& data, const NetworkConfig& net, int bins) {
  if (data.records.empty()) {
    throw std::invalid_argument("diagnose: dataset has no recorded tasks");
  }
  if (bins <= 0) {
    throw std::invalid_argument("diagnose: bin count must be positive");
  }
  if (data.num_queues != net.num_queues()) {
    throw std::invalid_argument("diagnose: dataset has " + std::to_string(data.num_queues) +
                                " queues, network has " + std::to_string(net.num_queues()));
  }
}

double resolve_t_hi(const ObservedDataset& data, double t_hi) {
  if (t_hi > 0.0) return t_hi;
  const double latest = latest_recorded_departure(data);
  if (!(latest > 0.0)) {
    throw std::invalid_argument("diagnose: dataset spans no positive time");
  }
  return latest;
}

Diagnosis make_grid(int bins, int num_queues, double t_hi) {
  Diagnosis diag;
  diag.t_hi = t_hi;
  diag.cells.assign(static_cast<std::size_t>(bins), std::vector<DiagnosisCell>(
                                                        static_cast<std::size_t>(num_queues)));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (auto& row : diag.cells) {
    for (DiagnosisCell& cell : row) {
      cell.mean_service = nan;
      cell.mean_wait = nan;
    }
  }
  return diag;
}

// Accumulates sums in the mean fields; finalize_grid divides them out.
void add_sample(Diagnosis& diag, double entry, QueueId queue, double s, double w) {
  if (entry < diag.t_lo || entry > diag.t_hi) return;
  const int bins = static_cast<int>(diag.cells.size());
  const double width = (diag.t_hi - diag.t_lo) / bins;
  int bin = width > 0.0 ? static_cast<int>((entry - diag.t_lo) / width) : 0;
  bin = std::min(std::max(bin, 0), bins - 1);
  DiagnosisCell& cell = diag.cells[static_cast<std::size_t>(bin)][static_cast<std::size_t>(queue)];
  if (!cell.has_value) {
    cell.mean_service = 0.0;
    cell.mean_wait = 0.0;
    cell.has_value = true;
  }
  cell.jobs += 1;
  cell.mean_service += s;
  cell.mean_wait += w;
}

void finalize_grid(Diagnosis& diag) {
  for (auto& row : diag.cells) {
    for (DiagnosisCell& cell : row) {
      if (cell.has_value) {
        cell.mean_service /= cell.jobs;
        cell.mean_wait /= cell.jobs;
      }
    }
  }
}

}  // namespace

Diagnosis diagnose(const ObservedDataset& data, const NetworkConfig& net,
                   const DiagnoseConfig& cfg) {
  check_inputs(data, net, cfg.bins);
  const double t_hi = resolve_t_hi(data, cfg.t_hi);

  EventLog log;
  std::vector<double> service;
  std::vector<double> waiting;
  if (cfg.use_em) {
    if (cfg.sampler.sweeps <= 0) {
      throw std::invalid_argument("diagnose: EM iteration count must be positive");
    }
    SamplerState state = initialize_state(data, net, cfg.sampler);
    SliceConfig slice = cfg.sampler.slice;
    if (!(slice.w > 0.0)) {
      const double mean = mean_observed_response(data);
      slice.w = mean > 0.0 ? mean : 1.0;
    }
    for (int t = 0; t < cfg.sampler.sweeps; ++t) {
      sweep(state, slice);
      ml_theta_step(state);
    }
    log = std::move(state.log);
    service.resize(log.jobs.size());
    waiting.resize(log.jobs.size());
    for (const Job& job : log.jobs) {
      const ResponseDecomposition parts = decompose_response(job);
      service[static_cast<std::size_t>(job.id)] = parts.service;
      waiting[static_cast<std::size_t>(job.id)] = parts.waiting;
    }
  } else {
    PosteriorDraws draws = run_posterior(data, net, cfg.sampler);
    log = std::move(draws.last_log);
    service = std::move(draws.mean_service);
    waiting = std::move(draws.mean_wait);
  }

  std::vector<double> entry(static_cast<std::size_t>(log.num_tasks), -1.0);
  for (const Job& job : log.jobs) {
    if (job.pi_pred == kNoJob) entry[static_cast<std::size_t>(job.task)] = job.d;
  }

  Diagnosis diag = make_grid(cfg.bins, net.num_queues(), t_hi);
  for (const Job& job : log.jobs) {
    if (job.pi_pred == kNoJob) continue;  // entry pseudo-job
    const std::size_t id = static_cast<std::size_t>(job.id);
    add_sample(diag, entry[static_cast<std::size_t>(job.task)], job.queue, service[id],
               waiting[id]);
  }
  finalize_grid(diag);
  return diag;
}

Diagnosis diagnose_wait_zero(const ObservedDataset& data, const NetworkConfig& net, int bins,
                             double t_hi) {
  check_inputs(data, net, bins);
  const double edge = resolve_t_hi(data, t_hi);
  Diagnosis diag = make_grid(bins, net.num_queues(), edge);
  for (const ObservedTask& rec : data.records) {
    const double entry = rec.jobs.front().d;
    for (std::size_t i = 1; i < rec.jobs.size(); ++i) {
      const ObservedJob& job = rec.jobs[i];
      if (job.queue < 0 || job.queue >= net.num_queues()) {
        throw std::invalid_argument("diagnose: record references queue " +
                                    std::to_string(job.queue));
      }
      add_sample(diag, entry, job.queue, job.d - job.a, 0.0);
    }
  }
  finalize_grid(diag);
  return diag;
}

double diagnosis_rmse(const Diagnosis& got, const Diagnosis& want) {
  if (got.cells.size() != want.cells.size()) {
    throw std::invalid_argument("diagnosis_rmse: grids have different bin counts");
  }
  if (got.t_lo != want.t_lo || got.t_hi != want.t_hi) {
    throw std::invalid_argument("diagnosis_rmse: grids cover different time spans");
  }
  double sum = 0.0;
  long n = 0;
  for (std::size_t b = 0; b < got.cells.size(); ++b) {
    if (got.cells[b].size() != want.cells[b].size()) {
      throw std::invalid_argument("diagnosis_rmse: grids have different queue counts");
    }
    for (std::size_t q = 0; q < got.cells[b].size(); ++q) {
      const DiagnosisCell& x = got.cells[b][q];
      const DiagnosisCell& y = want.cells[b][q];
      if (!x.has_value || !y.has_value) continue;
      const double d = x.mean_service - y.mean_service;
      sum += d * d;
      ++n;
    }
  }
  if (n == 0) {
    throw std::runtime_error("diagnosis_rmse: no cell is populated in both grids");
  }
  return std::sqrt(sum / static_cast<double>(n));
}

}  // namespace queuenet
