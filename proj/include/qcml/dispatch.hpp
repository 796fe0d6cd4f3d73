#pragma once

#include <string>

namespace qcml {

// Runs one command described by a JSON configuration:
//   {"command": "...", "action": "...", "params": {...},
//    "format": "json" | "csv", "output": "path", "seed": 0, "timing": false}
// and renders the report both as JSON and CSV.  When "output" is set the
// report is also written there in the requested format.
struct DispatchResult {
  int exit_code = 0;
  std::string json;
  std::string csv;
  std::string error_kind;
  std::string error_message;
};

DispatchResult dispatch(const std::string& config_json);

const char* version() noexcept;

}  // namespace qcml
