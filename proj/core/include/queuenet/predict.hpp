#pragma once

#include <utility>
#include <vector>

#include "queuenet/rng.hpp"
#include "queuenet/simulate.hpp"
#include "queuenet/types.hpp"

namespace queuenet {

// One horizon bin of predicted response. Tasks are binned by entry time;
// `mean` pools task response (exit minus entry) over every task the bin saw
// across all repetitions, and `sd` is the spread of the per-repetition bin
// means (0 when fewer than two repetitions hit the bin). A bin no task
// entered is flagged missing rather than zero-filled: has_value == false and
// mean/sd are NaN.
struct ResponseBin {
  double t_lo = 0.0;
  double t_hi = 0.0;
  int tasks = 0;
  double mean = 0.0;
  double sd = 0.0;
  bool has_value = false;
};

// Runs `reps` independent simulations of the workload on [0, horizon) and
// aggregates mean task response into bins of `bin_width` tiling the horizon.
// Explicit arrival times at or beyond the horizon are ignored; a piecewise
// rate of zero simply produces no entries while it applies.
std::vector<ResponseBin> predict_response(const NetworkConfig& net, const Theta& theta,
                                          const ArrivalSpec& workload, double horizon,
                                          double bin_width, int reps, Rng& rng);

enum class BaselineKind { Linear, Quadratic, PowerLaw };

// Least-squares workload-to-response baselines. Linear fits y = c0 + c1 x,
// Quadratic fits y = c0 + c1 x + c2 x^2, PowerLaw fits log y = c0 + c1 log x
// so its predictions are exp(c0) * x^c1 and its inputs must be positive.
struct RegressionBaseline {
  BaselineKind kind = BaselineKind::Linear;
  std::vector<double> coef;  // constant term first

  double predict(double x) const;
};

// Ordinary least squares on (workload, mean response) points. Throws
// std::invalid_argument when the design cannot identify the coefficients
// (too few points or a rank-deficient basis) or when a power-law input is
// not positive.
RegressionBaseline fit_baseline(BaselineKind kind,
                                const std::vector<std::pair<double, double>>& points);

}  // namespace queuenet
