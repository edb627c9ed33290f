#pragma once

#include <string>

#include "queuenet/observe.hpp"
#include "queuenet/types.hpp"

namespace queuenet {

// Serialization for the three artifact kinds. All writers are canonical:
// equal values produce identical bytes, and parsing a file and writing it
// back reproduces it exactly. Times are written as fixed-point decimal
// seconds with nine digits, so values round-trip exactly once they sit on
// the nanosecond grid (serializing an in-memory artifact rounds each time
// to within 5e-10 of the original).

// Network as JSON: two-space indent, sorted keys, trailing newline.
// Successor id -1 marks the network exit. Unknown top-level keys are
// ignored on parse so the network block can live inside a larger run
// configuration. Parsing checks format only; use validate_network for
// structural semantics.
std::string network_to_json(const NetworkConfig& net);
NetworkConfig network_from_json(const std::string& text);

// Event log as line-delimited text: `queues`, `tasks`, and `jobs` header
// lines, then one job per line as `task job queue arrival departure` in job
// id order. Parsing restores the per-task chains; run recover_services
// afterwards to refill the discipline-derived fields (s, u, queue links).
std::string event_log_to_text(const EventLog& log);
EventLog event_log_from_text(const std::string& text);

// Observed dataset as line-delimited text. The header carries the scheme
// (`p`, `seed`), the queue and task totals, and one `record task n0 njobs`
// line per logged task; the body lists each record's jobs in chain order
// using the same five-field job lines.
std::string dataset_to_text(const ObservedDataset& data);
ObservedDataset dataset_from_text(const std::string& text);

// Whole-file convenience wrappers; failures mention the path.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace queuenet
