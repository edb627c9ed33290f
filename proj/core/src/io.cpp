#include "queuenet/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace queuenet {

namespace {

using nlohmann::json;

constexpr const char* kLogMagic = "queuenet-eventlog v1";
constexpr const char* kDataMagic = "queuenet-observed v1";

std::string format_time(double t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", t);
  return buf;
}

[[noreturn]] void fail(const char* where, int line_no, const std::string& what) {
  throw std::runtime_error(std::string(where) + ": line " + std::to_string(line_no) + ": " +
                           what);
}

// Hands out physical lines and tracks the line number for error messages.
struct LineReader {
  const std::string& text;
  std::size_t pos = 0;
  int line_no = 0;

  explicit LineReader(const std::string& t) : text(t) {}

  bool next(std::string& line) {
    if (pos >= text.size()) return false;
    const std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) {
      line = text.substr(pos);
      pos = text.size();
    } else {
      line = text.substr(pos, end - pos);
      pos = end + 1;
    }
    ++line_no;
    return true;
  }
};

void expect_magic(const char* where, LineReader& in, const char* magic) {
  std::string line;
  if (!in.next(line) || line != magic) {
    fail(where, in.line_no == 0 ? 1 : in.line_no, std::string("expected header `") + magic + "`");
  }
}

template <typename T>
T header_value(const char* where, LineReader& in, const char* key) {
  std::string line;
  if (!in.next(line)) fail(where, in.line_no + 1, std::string("missing `") + key + "` header");
  std::istringstream ls(line);
  std::string word;
  T value{};
  std::string rest;
  if (!(ls >> word >> value) || word != key || (ls >> rest)) {
    fail(where, in.line_no, std::string("expected `") + key + " <value>`, got `" + line + "`");
  }
  return value;
}

struct JobLine {
  TaskId task = -1;
  JobId job = kNoJob;
  QueueId queue = 0;
  double a = 0.0;
  double d = 0.0;
};

JobLine parse_job_line(const char* where, LineReader& in) {
  std::string line;
  if (!in.next(line)) fail(where, in.line_no + 1, "missing job line");
  std::istringstream ls(line);
  JobLine out;
  std::string rest;
  if (!(ls >> out.task >> out.job >> out.queue >> out.a >> out.d) || (ls >> rest)) {
    fail(where, in.line_no, "expected `task job queue arrival departure`, got `" + line + "`");
  }
  if (out.d < out.a) {
    fail(where, in.line_no, "job departs before it arrives");
  }
  return out;
}

void expect_end(const char* where, LineReader& in) {
  std::string line;
  while (in.next(line)) {
    if (!line.empty()) fail(where, in.line_no, "trailing content `" + line + "`");
  }
}

std::string job_line_text(TaskId task, JobId job, QueueId queue, double a, double d) {
  return std::to_string(task) + ' ' + std::to_string(job) + ' ' + std::to_string(queue) + ' ' +
         format_time(a) + ' ' + format_time(d) + '\n';
}

}  // namespace

std::string network_to_json(const NetworkConfig& net) {
  if (net.successors.size() != net.queues.size()) {
    throw std::invalid_argument("network_to_json: queue and successor lists differ in length");
  }
  json j;
  j["initial_queue"] = net.initial_queue;
  j["max_path_length"] = net.max_path_length;
  j["queues"] = json::array();
  for (std::size_t i = 0; i < net.queues.size(); ++i) {
    json q;
    q["discipline"] = to_string(net.queues[i].discipline);
    q["processors"] = net.queues[i].processors;
    q["successors"] = net.successors[i];
    j["queues"].push_back(std::move(q));
  }
  return j.dump(2) + "\n";
}

NetworkConfig network_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("network_from_json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("queues") || !j["queues"].is_array()) {
    throw std::runtime_error("network_from_json: expected an object with a `queues` array");
  }
  NetworkConfig net;
  if (j.contains("initial_queue")) {
    if (!j["initial_queue"].is_number_integer()) {
      throw std::runtime_error("network_from_json: `initial_queue` must be an integer");
    }
    net.initial_queue = j["initial_queue"].get<QueueId>();
  }
  if (j.contains("max_path_length")) {
    if (!j["max_path_length"].is_number_integer()) {
      throw std::runtime_error("network_from_json: `max_path_length` must be an integer");
    }
    net.max_path_length = j["max_path_length"].get<int>();
  }
  for (const json& q : j["queues"]) {
    if (!q.is_object() || !q.contains("discipline") || !q["discipline"].is_string()) {
      throw std::runtime_error("network_from_json: every queue needs a `discipline` string");
    }
    QueueConfig cfg;
    if (!discipline_from_string(q["discipline"].get<std::string>(), cfg.discipline)) {
      throw std::runtime_error("network_from_json: unknown discipline `" +
                               q["discipline"].get<std::string>() + "`");
    }
    if (q.contains("processors")) {
      if (!q["processors"].is_number_integer()) {
        throw std::runtime_error("network_from_json: `processors` must be an integer");
      }
      cfg.processors = q["processors"].get<int>();
    }
    if (!q.contains("successors") || !q["successors"].is_array()) {
      throw std::runtime_error("network_from_json: every queue needs a `successors` array");
    }
    std::vector<QueueId> next;
    for (const json& s : q["successors"]) {
      if (!s.is_number_integer()) {
        throw std::runtime_error("network_from_json: successor ids must be integers");
      }
      next.push_back(s.get<QueueId>());
    }
    net.queues.push_back(cfg);
    net.successors.push_back(std::move(next));
  }
  return net;
}

std::string event_log_to_text(const EventLog& log) {
  std::string out;
  out += kLogMagic;
  out += '\n';
  out += "queues " + std::to_string(log.num_queues) + '\n';
  out += "tasks " + std::to_string(log.num_tasks) + '\n';
  out += "jobs " + std::to_string(log.jobs.size()) + '\n';
  for (std::size_t i = 0; i < log.jobs.size(); ++i) {
    const Job& job = log.jobs[i];
    if (job.id != static_cast<JobId>(i)) {
      throw std::invalid_argument("event_log_to_text: job ids must be dense and in order");
    }
    out += job_line_text(job.task, job.id, job.queue, job.a, job.d);
  }
  return out;
}

EventLog event_log_from_text(const std::string& text) {
  const char* kWhere = "event_log_from_text";
  LineReader in(text);
  expect_magic(kWhere, in, kLogMagic);
  const int num_queues = header_value<int>(kWhere, in, "queues");
  const int num_tasks = header_value<int>(kWhere, in, "tasks");
  const long num_jobs = header_value<long>(kWhere, in, "jobs");
  if (num_queues < 0 || num_tasks < 0 || num_jobs < 0) {
    fail(kWhere, in.line_no, "negative count in header");
  }

  EventLog log;
  log.num_queues = num_queues;
  log.num_tasks = num_tasks;
  log.jobs.assign(static_cast<std::size_t>(num_jobs), Job{});
  std::vector<char> seen(static_cast<std::size_t>(num_jobs), 0);
  for (long i = 0; i < num_jobs; ++i) {
    const JobLine line = parse_job_line(kWhere, in);
    if (line.job < 0 || line.job >= num_jobs) {
      fail(kWhere, in.line_no, "job id " + std::to_string(line.job) + " out of range");
    }
    if (seen[static_cast<std::size_t>(line.job)]) {
      fail(kWhere, in.line_no, "duplicate job id " + std::to_string(line.job));
    }
    seen[static_cast<std::size_t>(line.job)] = 1;
    if (line.task < 0 || line.task >= num_tasks) {
      fail(kWhere, in.line_no, "task id " + std::to_string(line.task) + " out of range");
    }
    if (line.queue < 0 || line.queue >= num_queues) {
      fail(kWhere, in.line_no, "queue id " + std::to_string(line.queue) + " out of range");
    }
    Job& job = log.jobs[static_cast<std::size_t>(line.job)];
    job.id = line.job;
    job.task = line.task;
    job.queue = line.queue;
    job.a = line.a;
    job.d = line.d;
  }
  expect_end(kWhere, in);

  // Rebuild the per-task chains; arrival order ties broken by id.
  std::vector<std::vector<JobId>> by_task(static_cast<std::size_t>(num_tasks));
  for (const Job& job : log.jobs) by_task[static_cast<std::size_t>(job.task)].push_back(job.id);
  for (int t = 0; t < num_tasks; ++t) {
    std::vector<JobId>& chain = by_task[static_cast<std::size_t>(t)];
    if (chain.empty()) {
      fail(kWhere, in.line_no, "task " + std::to_string(t) + " has no jobs");
    }
    std::sort(chain.begin(), chain.end(), [&](JobId x, JobId y) {
      const Job& jx = log.jobs[static_cast<std::size_t>(x)];
      const Job& jy = log.jobs[static_cast<std::size_t>(y)];
      if (jx.a != jy.a) return jx.a < jy.a;
      return x < y;
    });
    for (std::size_t i = 0; i < chain.size(); ++i) {
      Job& job = log.jobs[static_cast<std::size_t>(chain[i])];
      job.pi_pred = i == 0 ? kNoJob : chain[i - 1];
      job.pi_succ = i + 1 == chain.size() ? kNoJob : chain[i + 1];
      if (i > 0) {
        const Job& prev = log.jobs[static_cast<std::size_t>(chain[i - 1])];
        if (job.a != prev.d) {
          fail(kWhere, in.line_no,
               "task " + std::to_string(t) + " chain is not contiguous at job " +
                   std::to_string(job.id));
        }
      }
    }
  }
  return log;
}

std::string dataset_to_text(const ObservedDataset& data) {
  std::string out;
  out += kDataMagic;
  out += '\n';
  out += "queues " + std::to_string(data.num_queues) + '\n';
  out += "tasks " + std::to_string(data.total_tasks) + '\n';
  out += "p " + format_time(data.scheme.p) + '\n';
  out += "seed " + std::to_string(data.scheme.seed) + '\n';
  out += "records " + std::to_string(data.records.size()) + '\n';
  for (const ObservedTask& rec : data.records) {
    if (rec.jobs.empty()) {
      throw std::invalid_argument("dataset_to_text: record without jobs");
    }
    out += "record " + std::to_string(rec.task) + ' ' + std::to_string(rec.n0) + ' ' +
           std::to_string(rec.jobs.size()) + '\n';
  }
  for (const ObservedTask& rec : data.records) {
    for (const ObservedJob& job : rec.jobs) {
      out += job_line_text(job.task, job.job, job.queue, job.a, job.d);
    }
  }
  return out;
}

ObservedDataset dataset_from_text(const std::string& text) {
  const char* kWhere = "dataset_from_text";
  LineReader in(text);
  expect_magic(kWhere, in, kDataMagic);
  ObservedDataset data;
  data.num_queues = header_value<int>(kWhere, in, "queues");
  data.total_tasks = header_value<int>(kWhere, in, "tasks");
  data.scheme.p = header_value<double>(kWhere, in, "p");
  data.scheme.seed = header_value<std::uint64_t>(kWhere, in, "seed");
  if (data.num_queues < 0 || data.total_tasks < 0) {
    fail(kWhere, in.line_no, "negative count in header");
  }
  if (!(data.scheme.p >= 0.0 && data.scheme.p <= 1.0)) {
    fail(kWhere, in.line_no, "observation probability must lie in [0, 1]");
  }
  const long num_records = header_value<long>(kWhere, in, "records");
  if (num_records < 0) fail(kWhere, in.line_no, "negative record count");

  std::vector<std::size_t> record_jobs;
  for (long r = 0; r < num_records; ++r) {
    std::string line;
    if (!in.next(line)) fail(kWhere, in.line_no + 1, "missing record line");
    std::istringstream ls(line);
    std::string word, rest;
    ObservedTask rec;
    long njobs = 0;
    if (!(ls >> word >> rec.task >> rec.n0 >> njobs) || word != "record" || (ls >> rest)) {
      fail(kWhere, in.line_no, "expected `record task n0 njobs`, got `" + line + "`");
    }
    if (njobs <= 0) fail(kWhere, in.line_no, "record needs at least one job");
    record_jobs.push_back(static_cast<std::size_t>(njobs));
    data.records.push_back(std::move(rec));
  }
  for (std::size_t r = 0; r < data.records.size(); ++r) {
    ObservedTask& rec = data.records[r];
    for (std::size_t i = 0; i < record_jobs[r]; ++i) {
      const JobLine line = parse_job_line(kWhere, in);
      if (line.task != rec.task) {
        fail(kWhere, in.line_no,
             "job belongs to task " + std::to_string(line.task) + ", record covers task " +
                 std::to_string(rec.task));
      }
      if (line.queue < 0 || line.queue >= data.num_queues) {
        fail(kWhere, in.line_no, "queue id " + std::to_string(line.queue) + " out of range");
      }
      rec.jobs.push_back(ObservedJob{line.task, line.job, line.queue, line.a, line.d});
    }
  }
  expect_end(kWhere, in);
  return data;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_text_file: cannot open " + path);
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write_text_file: failed writing " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_text_file: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw std::runtime_error("read_text_file: failed reading " + path);
  return buf.str();
}

}  // namespace queuenet
