#include "queuenet/predict.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace queuenet {

namespace {

// Entry times strictly inside [0, horizon) under the workload spec.
std::vector<double> entries_until(const ArrivalSpec& spec, double horizon, Rng& rng) {
  std::vector<double> entries;
  switch (spec.kind) {
    case ArrivalSpec::Kind::Poisson: {
      double t = 0.0;
      while (true) {
        t += rng.exponential(spec.rate);
        if (t >= horizon) break;
        entries.push_back(t);
      }
      break;
    }
    case ArrivalSpec::Kind::ExplicitTimes: {
      for (double v : spec.times) {
        if (v < horizon) entries.push_back(v);
      }
      break;
    }
    case ArrivalSpec::Kind::PiecewiseRate: {
      double max_rate = 0.0;
      for (double r : spec.rates) max_rate = std::max(max_rate, r);
      if (!(max_rate > 0.0)) break;
      auto rate_at = [&](double t) {
        std::size_t i = spec.breakpoints.size();
        while (i > 0 && spec.breakpoints[i - 1] > t) --i;
        return i == 0 ? spec.rates.front() : spec.rates[i - 1];
      };
      double t = 0.0;
      while (true) {
        t += rng.exponential(max_rate);
        if (t >= horizon) break;
        if (rng.uniform() * max_rate <= rate_at(t)) entries.push_back(t);
      }
      break;
    }
  }
  return entries;
}

}  // namespace

std::vector<ResponseBin> predict_response(const NetworkConfig& net, const Theta& theta,
                                          const ArrivalSpec& workload, double horizon,
                                          double bin_width, int reps, Rng& rng) {
  if (!(horizon > 0.0)) {
    throw std::invalid_argument("predict_response: horizon must be positive");
  }
  if (!(bin_width > 0.0)) {
    throw std::invalid_argument("predict_response: bin width must be positive");
  }
  if (reps < 1) {
    throw std::invalid_argument("predict_response: need at least one repetition");
  }
  if (static_cast<int>(theta.size()) != net.num_queues()) {
    throw std::invalid_argument("predict_response: theta has " + std::to_string(theta.size()) +
                                " rates for " + std::to_string(net.num_queues()) + " queues");
  }
  for (double rate : theta) {
    if (!(rate > 0.0)) {
      throw std::invalid_argument("predict_response: service rates must be positive");
    }
  }

  const int nbins = static_cast<int>(std::ceil(horizon / bin_width));
  std::vector<double> pooled_sum(nbins, 0.0);
  std::vector<int> pooled_count(nbins, 0);
  std::vector<double> rep_mean_sum(nbins, 0.0);
  std::vector<double> rep_mean_sq(nbins, 0.0);
  std::vector<int> rep_hits(nbins, 0);

  std::vector<double> rep_sum(nbins, 0.0);
  std::vector<int> rep_count(nbins, 0);
  for (int rep = 0; rep < reps; ++rep) {
    const std::vector<double> entries = entries_until(workload, horizon, rng);
    if (entries.empty()) continue;
    const EventLog log =
        simulate_network(net, theta, ArrivalSpec::explicit_times(entries),
                         static_cast<int>(entries.size()), rng);

    std::fill(rep_sum.begin(), rep_sum.end(), 0.0);
    std::fill(rep_count.begin(), rep_count.end(), 0);
    for (const Job& job : log.jobs) {
      if (job.pi_pred != kNoJob || job.pi_succ == kNoJob) continue;
      const double entry = log.jobs[job.pi_succ].a;
      JobId last = job.pi_succ;
      while (log.jobs[last].pi_succ != kNoJob) last = log.jobs[last].pi_succ;
      const double response = log.jobs[last].d - entry;
      const int bin = std::min(nbins - 1, static_cast<int>(entry / bin_width));
      rep_sum[bin] += response;
      rep_count[bin] += 1;
    }
    for (int b = 0; b < nbins; ++b) {
      if (rep_count[b] == 0) continue;
      const double m = rep_sum[b] / rep_count[b];
      pooled_sum[b] += rep_sum[b];
      pooled_count[b] += rep_count[b];
      rep_mean_sum[b] += m;
      rep_mean_sq[b] += m * m;
      rep_hits[b] += 1;
    }
  }

  std::vector<ResponseBin> bins(nbins);
  for (int b = 0; b < nbins; ++b) {
    ResponseBin& out = bins[b];
    out.t_lo = b * bin_width;
    out.t_hi = std::min(horizon, (b + 1) * bin_width);
    out.tasks = pooled_count[b];
    out.has_value = pooled_count[b] > 0;
    if (!out.has_value) {
      out.mean = std::numeric_limits<double>::quiet_NaN();
      out.sd = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    out.mean = pooled_sum[b] / pooled_count[b];
    if (rep_hits[b] >= 2) {
      const double mbar = rep_mean_sum[b] / rep_hits[b];
      const double var =
          (rep_mean_sq[b] - rep_hits[b] * mbar * mbar) / (rep_hits[b] - 1);
      out.sd = std::sqrt(std::max(0.0, var));
    } else {
      out.sd = 0.0;
    }
  }
  return bins;
}

double RegressionBaseline::predict(double x) const {
  switch (kind) {
    case BaselineKind::Linear:
      return coef[0] + coef[1] * x;
    case BaselineKind::Quadratic:
      return coef[0] + x * (coef[1] + x * coef[2]);
    case BaselineKind::PowerLaw:
      if (!(x > 0.0)) {
        throw std::invalid_argument("RegressionBaseline: power-law prediction needs x > 0");
      }
      return std::exp(coef[0] + coef[1] * std::log(x));
  }
  throw std::invalid_argument("RegressionBaseline: unknown kind");
}

RegressionBaseline fit_baseline(BaselineKind kind,
                                const std::vector<std::pair<double, double>>& points) {
  const int k = kind == BaselineKind::Quadratic ? 3 : 2;
  const int n = static_cast<int>(points.size());
  if (n < k) {
    throw std::invalid_argument("fit_baseline: singular design: " + std::to_string(n) +
                                " points cannot identify " + std::to_string(k) +
                                " coefficients");
  }

  Eigen::MatrixXd design(n, k);
  Eigen::VectorXd target(n);
  for (int i = 0; i < n; ++i) {
    const auto& [x, y] = points[i];
    switch (kind) {
      case BaselineKind::Linear:
        design(i, 0) = 1.0;
        design(i, 1) = x;
        target(i) = y;
        break;
      case BaselineKind::Quadratic:
        design(i, 0) = 1.0;
        design(i, 1) = x;
        design(i, 2) = x * x;
        target(i) = y;
        break;
      case BaselineKind::PowerLaw:
        if (!(x > 0.0) || !(y > 0.0)) {
          throw std::invalid_argument("fit_baseline: power-law points must be positive");
        }
        design(i, 0) = 1.0;
        design(i, 1) = std::log(x);
        target(i) = std::log(y);
        break;
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < k) {
    throw std::invalid_argument("fit_baseline: singular design: basis columns are dependent");
  }
  const Eigen::VectorXd c = qr.solve(target);

  RegressionBaseline out;
  out.kind = kind;
  out.coef.assign(c.data(), c.data() + k);
  return out;
}

}  // namespace queuenet
