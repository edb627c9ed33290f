// Command-line front end: simulation, observation, inference, prediction,
// diagnosis, and model selection over the serialized artifact formats.
//
// Conventions shared by every subcommand:
//   - `--config` names a JSON file; the network block is read by
//     network_from_json and command parameters sit beside it.
//   - `--seed` wins over the QUEUENET_SEED environment variable; the
//     fallback is 0. Given the same seed and inputs, output files are
//     byte-identical.
//   - with `--out` the artifact goes to that file and a short key/value
//     summary goes to stdout; without it the artifact itself is stdout.
//   - failures print a one-line JSON error record to stderr and exit 1.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "queuenet/diagnose.hpp"
#include "queuenet/experiment.hpp"
#include "queuenet/io.hpp"
#include "queuenet/observe.hpp"
#include "queuenet/predict.hpp"
#include "queuenet/rng.hpp"
#include "queuenet/sampler.hpp"
#include "queuenet/selection.hpp"
#include "queuenet/simulate.hpp"

namespace {

using nlohmann::json;
using namespace queuenet;

struct CommonArgs {
  std::string config;
  std::string data;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int sweeps = 1000;
  int burn_in = 100;
  int thin = 1;
  bool sweeps_given = false;
  bool burn_in_given = false;
  bool thin_given = false;
};

std::uint64_t resolve_seed(const CommonArgs& args) {
  if (args.seed_given) return args.seed;
  if (const char* env = std::getenv("QUEUENET_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw std::runtime_error("QUEUENET_SEED is not an unsigned integer: " +
                               std::string(env));
    }
    return static_cast<std::uint64_t>(v);
  }
  return 0;
}

json load_json(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

NetworkConfig load_network(const std::string& path) {
  const NetworkConfig net = network_from_json(read_text_file(path));
  const std::vector<std::string> errors = validate_network(net);
  if (!errors.empty()) {
    throw std::runtime_error(path + ": invalid network: " + errors.front());
  }
  return net;
}

Theta theta_from_config(const json& cfg, const NetworkConfig& net, const std::string& path) {
  if (!cfg.contains("theta") || !cfg["theta"].is_array()) {
    throw std::runtime_error(path + ": missing `theta` array");
  }
  Theta theta;
  for (const json& v : cfg["theta"]) {
    if (!v.is_number()) throw std::runtime_error(path + ": `theta` entries must be numbers");
    theta.push_back(v.get<double>());
  }
  if (static_cast<int>(theta.size()) != net.num_queues()) {
    throw std::runtime_error(path + ": `theta` has " + std::to_string(theta.size()) +
                             " rates for " + std::to_string(net.num_queues()) + " queues");
  }
  return theta;
}

ArrivalSpec arrivals_from_config(const json& cfg, const std::string& path) {
  if (!cfg.contains("arrivals") || !cfg["arrivals"].is_object()) {
    throw std::runtime_error(path + ": missing `arrivals` object");
  }
  const json& a = cfg["arrivals"];
  const std::string kind = a.value("kind", "");
  if (kind == "poisson") {
    if (!a.contains("rate")) throw std::runtime_error(path + ": poisson arrivals need `rate`");
    return ArrivalSpec::poisson(a["rate"].get<double>());
  }
  if (kind == "explicit") {
    if (!a.contains("times") || !a["times"].is_array()) {
      throw std::runtime_error(path + ": explicit arrivals need a `times` array");
    }
    return ArrivalSpec::explicit_times(a["times"].get<std::vector<double>>());
  }
  if (kind == "piecewise") {
    if (!a.contains("breakpoints") || !a.contains("rates")) {
      throw std::runtime_error(path + ": piecewise arrivals need `breakpoints` and `rates`");
    }
    return ArrivalSpec::piecewise(a["breakpoints"].get<std::vector<double>>(),
                                  a["rates"].get<std::vector<double>>());
  }
  throw std::runtime_error(path + ": `arrivals.kind` must be poisson, explicit, or piecewise");
}

std::string fixed9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

// Artifact to --out (with a summary on stdout) or to stdout alone.
void deliver(const CommonArgs& args, const std::string& artifact, const std::string& summary) {
  if (args.out.empty()) {
    std::cout << artifact;
  } else {
    write_text_file(args.out, artifact);
    std::cout << summary;
  }
}

double latest_departure(const ObservedDataset& data) {
  double t = 0.0;
  for (const ObservedTask& rec : data.records) {
    for (const ObservedJob& job : rec.jobs) t = std::max(t, job.d);
  }
  return t;
}

std::vector<double> task_entries(const EventLog& log) {
  std::vector<double> entries;
  for (const Job& job : log.jobs) {
    if (job.pi_pred == kNoJob) entries.push_back(job.d);
  }
  std::sort(entries.begin(), entries.end());
  return entries;
}

PosteriorConfig sampler_config(const CommonArgs& args, const json& cfg) {
  PosteriorConfig out;
  out.sweeps = args.sweeps;
  out.burn_in = args.burn_in;
  out.thin = args.thin;
  out.seed = resolve_seed(args);
  if (cfg.contains("prior")) {
    out.prior.shape = cfg["prior"].value("shape", 0.0);
    out.prior.rate = cfg["prior"].value("rate", 0.0);
  }
  return out;
}

int cmd_simulate(const CommonArgs& args, int tasks_flag) {
  const json cfg = load_json(args.config);
  const NetworkConfig net = load_network(args.config);
  const Theta theta = theta_from_config(cfg, net, args.config);
  const ArrivalSpec arrivals = arrivals_from_config(cfg, args.config);
  int tasks = tasks_flag > 0 ? tasks_flag : cfg.value("tasks", 0);
  if (arrivals.kind == ArrivalSpec::Kind::ExplicitTimes && tasks <= 0) {
    tasks = static_cast<int>(arrivals.times.size());
  }
  if (tasks <= 0) throw std::runtime_error("simulate: `tasks` must be positive");

  Rng rng(resolve_seed(args));
  const EventLog log = simulate_network(net, theta, arrivals, tasks, rng);
  std::string summary;
  summary += "tasks " + std::to_string(log.num_tasks) + "\n";
  summary += "jobs " + std::to_string(log.jobs.size()) + "\n";
  deliver(args, event_log_to_text(log), summary);
  return 0;
}

int cmd_observe(const CommonArgs& args, double p_flag, bool p_given) {
  const EventLog log = event_log_from_text(read_text_file(args.data));
  double p = p_flag;
  if (!p_given) {
    if (args.config.empty()) {
      throw std::runtime_error("observe: pass --p or a config with `observe_p`");
    }
    const json cfg = load_json(args.config);
    if (!cfg.contains("observe_p")) {
      throw std::runtime_error("observe: pass --p or a config with `observe_p`");
    }
    p = cfg["observe_p"].get<double>();
  }
  const ObservedDataset data = observe(log, ObservationScheme{p, resolve_seed(args)});
  std::string summary;
  summary += "records " + std::to_string(data.records.size()) + "\n";
  summary += "tasks " + std::to_string(data.total_tasks) + "\n";
  deliver(args, dataset_to_text(data), summary);
  return 0;
}

int cmd_infer(const CommonArgs& args, bool use_em) {
  const json cfg = load_json(args.config);
  const NetworkConfig net = load_network(args.config);
  const ObservedDataset data = dataset_from_text(read_text_file(args.data));
  const PosteriorConfig sampler = sampler_config(args, cfg);

  std::string csv;
  std::string summary;
  if (use_em) {
    const std::vector<Theta> path = stochastic_em(data, net, sampler);
    csv = "iter";
    for (int q = 0; q < net.num_queues(); ++q) csv += ",theta_" + std::to_string(q);
    csv += "\n";
    for (std::size_t i = 0; i < path.size(); ++i) {
      csv += std::to_string(i);
      for (double v : path[i]) csv += "," + fixed9(v);
      csv += "\n";
    }
    summary += "iters " + std::to_string(path.size()) + "\n";
    for (int q = 0; q < net.num_queues(); ++q) {
      summary += "theta_final " + std::to_string(q) + " " + fixed9(path.back()[q]) + "\n";
    }
  } else {
    const PosteriorDraws draws = run_posterior(data, net, sampler);
    csv = "draw";
    for (int q = 0; q < net.num_queues(); ++q) csv += ",theta_" + std::to_string(q);
    csv += "\n";
    for (std::size_t i = 0; i < draws.thetas.size(); ++i) {
      csv += std::to_string(i);
      for (double v : draws.thetas[i]) csv += "," + fixed9(v);
      csv += "\n";
    }
    summary += "draws " + std::to_string(draws.draws) + "\n";
    summary += "stuck " + std::to_string(draws.stuck_moves) + "\n";
    for (int q = 0; q < net.num_queues(); ++q) {
      double mean = 0.0;
      for (const Theta& t : draws.thetas) mean += t[q];
      if (!draws.thetas.empty()) mean /= static_cast<double>(draws.thetas.size());
      summary += "theta_mean " + std::to_string(q) + " " + fixed9(mean) + "\n";
    }
  }
  deliver(args, csv, summary);
  return 0;
}

int cmd_predict(const CommonArgs& args, int reps_flag) {
  const json cfg = load_json(args.config);
  const NetworkConfig net = load_network(args.config);
  const Theta theta = theta_from_config(cfg, net, args.config);
  const double horizon = cfg.value("horizon", 0.0);
  const double bin_width = cfg.value("bin_width", 5.0);
  const int reps = reps_flag > 0 ? reps_flag : cfg.value("reps", 10);

  // With --data the forecast conditions on the empirical entry times of the
  // logged workload; otherwise on the configured arrival process.
  ArrivalSpec workload = ArrivalSpec::poisson(1.0);
  if (!args.data.empty()) {
    workload = ArrivalSpec::explicit_times(task_entries(event_log_from_text(
        read_text_file(args.data))));
  } else {
    workload = arrivals_from_config(cfg, args.config);
  }

  Rng rng(resolve_seed(args));
  const std::vector<ResponseBin> bins =
      predict_response(net, theta, workload, horizon, bin_width, reps, rng);

  std::string csv = "t_lo,t_hi,tasks,mean,sd\n";
  int populated = 0;
  long tasks = 0;
  for (const ResponseBin& bin : bins) {
    csv += fixed9(bin.t_lo) + "," + fixed9(bin.t_hi) + "," + std::to_string(bin.tasks) + "," +
           fixed9(bin.mean) + "," + fixed9(bin.sd) + "\n";
    if (bin.has_value) ++populated;
    tasks += bin.tasks;
  }
  std::string summary;
  summary += "bins " + std::to_string(bins.size()) + "\n";
  summary += "populated " + std::to_string(populated) + "\n";
  summary += "tasks " + std::to_string(tasks) + "\n";
  deliver(args, csv, summary);
  return 0;
}

int cmd_diagnose(const CommonArgs& args, const std::string& reference, int bins_flag,
                 bool use_em) {
  const json cfg = load_json(args.config);
  const NetworkConfig net = load_network(args.config);
  const ObservedDataset data = dataset_from_text(read_text_file(args.data));

  DiagnoseConfig dc;
  dc.bins = bins_flag > 0 ? bins_flag : cfg.value("bins", 50);
  dc.t_hi = cfg.value("t_hi", 0.0);
  dc.use_em = use_em;
  dc.sampler = sampler_config(args, cfg);

  ObservedDataset ref;
  const bool have_ref = !reference.empty();
  if (have_ref) {
    ref = dataset_from_text(read_text_file(reference));
    if (dc.t_hi <= 0.0) {
      dc.t_hi = std::max(latest_departure(data), latest_departure(ref));
    }
  }

  const Diagnosis diag = diagnose(data, net, dc);
  std::string csv = "bin,t_lo,t_hi,queue,jobs,mean_service,mean_wait\n";
  const double width = (diag.t_hi - diag.t_lo) / static_cast<double>(diag.cells.size());
  for (std::size_t b = 0; b < diag.cells.size(); ++b) {
    for (std::size_t q = 0; q < diag.cells[b].size(); ++q) {
      const DiagnosisCell& cell = diag.cells[b][q];
      csv += std::to_string(b) + "," + fixed9(diag.t_lo + width * static_cast<double>(b)) +
             "," + fixed9(std::min(diag.t_hi, diag.t_lo + width * static_cast<double>(b + 1))) +
             "," + std::to_string(q) + "," + std::to_string(cell.jobs) + "," +
             fixed9(cell.mean_service) + "," + fixed9(cell.mean_wait) + "\n";
    }
  }

  std::string summary;
  int populated = 0;
  for (const auto& row : diag.cells) {
    for (const DiagnosisCell& cell : row) {
      if (cell.has_value) ++populated;
    }
  }
  summary += "cells " + std::to_string(populated) + "\n";
  if (have_ref) {
    DiagnoseConfig rc = dc;
    const Diagnosis ref_diag = diagnose(ref, net, rc);
    summary += "rmse " + fixed9(diagnosis_rmse(diag, ref_diag)) + "\n";
    summary += "rmse_wait_zero " +
               fixed9(diagnosis_rmse(diagnose_wait_zero(ref, net, dc.bins, dc.t_hi), ref_diag)) +
               "\n";
  }
  deliver(args, csv, summary);
  return 0;
}

int cmd_select(const CommonArgs& args, bool experiment, int reps_flag, double critical) {
  if (experiment) {
    MissingQueueProtocol protocol;
    if (!args.config.empty()) {
      const json cfg = load_json(args.config);
      protocol.work_queues = cfg.value("work_queues", protocol.work_queues);
      protocol.arrival_rate = cfg.value("arrival_rate", protocol.arrival_rate);
      protocol.work_rate = cfg.value("work_rate", protocol.work_rate);
      protocol.tasks = cfg.value("tasks", protocol.tasks);
      protocol.reps = cfg.value("reps", protocol.reps);
      if (cfg.contains("utilizations")) {
        protocol.utilizations = cfg["utilizations"].get<std::vector<double>>();
      }
    }
    if (reps_flag > 0) protocol.reps = reps_flag;
    if (args.sweeps_given) protocol.fit.sweeps = args.sweeps;
    if (args.burn_in_given) protocol.fit.burn_in = args.burn_in;
    if (args.thin_given) protocol.fit.thin = args.thin;
    protocol.fit.critical = critical;
    protocol.fit.seed = resolve_seed(args);

    const MissingQueueReport report = experiment_missing_queue(protocol);
    std::ostringstream trials;
    write_missing_queue_trials_csv(report, trials);
    std::ostringstream table;
    write_missing_queue_summary_csv(report, table);

    std::string summary;
    for (std::size_t i = 0; i < report.utilizations.size(); ++i) {
      summary += "error " + fixed9(report.utilizations[i]) + " " +
                 fixed9(report.error_by_utilization[i]) + "\n";
    }
    summary += "auc " + fixed9(report.auc) + "\n";
    if (args.out.empty()) {
      std::cout << table.str();
    } else {
      write_text_file(args.out + ".trials.csv", trials.str());
      write_text_file(args.out + ".summary.csv", table.str());
      std::cout << summary;
    }
    return 0;
  }

  const NetworkConfig net = load_network(args.config);
  const ObservedDataset data = dataset_from_text(read_text_file(args.data));
  std::vector<QueueId> work;
  for (QueueId q = 0; q < net.num_queues(); ++q) {
    if (q != net.initial_queue) work.push_back(q);
  }
  const std::vector<BottleneckHypothesis> candidates = pair_hypotheses(net, work);

  SelectionConfig sel;  // library defaults unless the flags override them
  if (args.sweeps_given) sel.sweeps = args.sweeps;
  if (args.burn_in_given) sel.burn_in = args.burn_in;
  if (args.thin_given) sel.thin = args.thin;
  sel.critical = critical;
  sel.seed = resolve_seed(args);
  const DetectionOutcome outcome = detect_missing_queue(data, net, candidates, sel);

  std::string csv = "candidate,bottleneck,attached_0,attached_1,z,mean_m,sigma,reject,draws\n";
  for (std::size_t i = 0; i < outcome.per_candidate.size(); ++i) {
    const TestResult& r = outcome.per_candidate[i];
    const BottleneckHypothesis& h = candidates[i];
    csv += std::to_string(i) + "," + std::to_string(h.bottleneck) + "," +
           std::to_string(h.attached[0]) + "," + std::to_string(h.attached[1]) + "," +
           fixed9(r.z) + "," + fixed9(r.mean_m) + "," + fixed9(r.sigma) + "," +
           std::to_string(r.reject ? 1 : 0) + "," + std::to_string(r.draws_used) + "\n";
  }
  std::string summary;
  summary += "candidates " + std::to_string(outcome.per_candidate.size()) + "\n";
  summary += "detected " + std::to_string(outcome.bottleneck_detected ? 1 : 0) + "\n";
  summary += "max_z " + fixed9(outcome.max_z) + "\n";
  deliver(args, csv, summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"queueing-network simulation and Bayesian inference toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  int tasks_flag = 0;
  int reps_flag = 0;
  int bins_flag = 0;
  double p_flag = 1.0;
  bool use_em = false;
  bool experiment = false;
  double critical = 1.96;
  std::string reference;

  auto add_common = [&](CLI::App* cmd, bool with_sampler) {
    cmd->add_option("--config", args.config, "JSON configuration file");
    cmd->add_option("--out", args.out, "output file (stdout when omitted)");
    CLI::Option* seed = cmd->add_option("--seed", args.seed, "random seed");
    seed->each([&](const std::string&) { args.seed_given = true; });
    if (with_sampler) {
      cmd->add_option("--sweeps", args.sweeps, "MCMC sweeps / EM iterations")
          ->each([&](const std::string&) { args.sweeps_given = true; });
      cmd->add_option("--burn-in", args.burn_in, "sweeps discarded before retention")
          ->each([&](const std::string&) { args.burn_in_given = true; });
      cmd->add_option("--thin", args.thin, "retain every thin-th draw")
          ->each([&](const std::string&) { args.thin_given = true; });
    }
    return cmd;
  };

  CLI::App* sim = add_common(app.add_subcommand("simulate", "draw an event log"), false);
  sim->add_option("--tasks", tasks_flag, "number of tasks (overrides config)");

  CLI::App* obs = add_common(app.add_subcommand("observe", "sample a dataset from a log"),
                             false);
  obs->add_option("--data", args.data, "event log file")->required();
  CLI::Option* p_opt = obs->add_option("--p", p_flag, "observation probability");

  CLI::App* inf = add_common(app.add_subcommand("infer", "posterior or EM rate estimates"),
                             true);
  inf->add_option("--data", args.data, "observed dataset file")->required();
  inf->add_flag("--em", use_em, "stochastic EM instead of posterior sampling");

  CLI::App* pre = add_common(app.add_subcommand("predict", "forecast binned mean response"),
                             false);
  pre->add_option("--data", args.data, "event log supplying empirical entry times");
  pre->add_option("--reps", reps_flag, "Monte Carlo repetitions (overrides config)");

  CLI::App* dia = add_common(app.add_subcommand("diagnose", "bin service and waiting time"),
                             true);
  dia->add_option("--data", args.data, "observed dataset file")->required();
  dia->add_option("--reference", reference, "full-data dataset to score against");
  dia->add_option("--bins", bins_flag, "time bins (overrides config)");
  dia->add_flag("--em", use_em, "stochastic EM instead of posterior sampling");

  CLI::App* sel = add_common(app.add_subcommand("select", "test for a missing queue"), true);
  sel->add_option("--data", args.data, "observed dataset file");
  sel->add_flag("--experiment", experiment, "run the synthetic detection study");
  sel->add_option("--reps", reps_flag, "repetitions per utilization (experiment mode)");
  sel->add_option("--critical", critical, "one-sided rejection threshold");

  CLI11_PARSE(app, argc, argv);

  const auto require_config = [&](const char* cmd) {
    if (args.config.empty()) {
      throw std::runtime_error(std::string(cmd) + ": --config is required");
    }
  };

  try {
    if (sim->parsed()) {
      require_config("simulate");
      return cmd_simulate(args, tasks_flag);
    }
    if (obs->parsed()) return cmd_observe(args, p_flag, p_opt->count() > 0);
    if (inf->parsed()) {
      require_config("infer");
      return cmd_infer(args, use_em);
    }
    if (pre->parsed()) {
      require_config("predict");
      return cmd_predict(args, reps_flag);
    }
    if (dia->parsed()) {
      require_config("diagnose");
      return cmd_diagnose(args, reference, bins_flag, use_em);
    }
    if (sel->parsed()) {
      if (!experiment && args.data.empty()) {
        throw std::runtime_error("select: pass --data or --experiment");
      }
      if (!experiment && args.config.empty()) {
        throw std::runtime_error("select: --config is required with --data");
      }
      return cmd_select(args, experiment, reps_flag, critical);
    }
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
  return 1;
}
