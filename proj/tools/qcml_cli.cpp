// Command-line front end: qcml <command> [action] [--key value ...]
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qcml/qcml.h"

using json = nlohmann::json;

namespace {

json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return json::parse(ss.str());
}

// "@file" and existing *.json paths are loaded; other text is parsed as JSON
// when possible and kept as a string otherwise.
json flag_value(const std::string& text) {
  if (!text.empty() && text[0] == '@') return load_file(text.substr(1));
  if (text.size() > 5 && text.substr(text.size() - 5) == ".json" && std::filesystem::exists(text)) return load_file(text);
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qcml: quasiconformal modulus toolkit"};
  app.allow_extras();
  std::string config_path, output, format = "json";
  long seed = -1;
  bool timing = false, show_version = false;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--output,-o", output, "write the report to this path");
  app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", seed, "seed for randomized sampling");
  app.add_flag("--timing", timing, "include wall time in the JSON report");
  app.add_flag("--version", show_version, "print the version");
  app.footer(
      "Commands: gauge, modulus, grid, snake, threepoint, map, cusp.\n"
      "Any other --key value pair becomes a parameter; values are parsed as JSON,\n"
      "and @file or *.json paths are loaded from disk.");
  CLI11_PARSE(app, argc, argv);
  if (show_version) {
    std::cout << qcml_version() << "\n";
    return 0;
  }

  json cfg = json::object();
  try {
    if (!config_path.empty()) cfg = load_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "ConfigError: " << e.what() << "\n";
    return 1;
  }
  if (!cfg.contains("params")) cfg["params"] = json::object();

  std::vector<std::string> rest = app.remaining();
  std::size_t i = 0;
  if (i < rest.size() && rest[i].rfind("-", 0) != 0) cfg["command"] = rest[i++];
  if (i < rest.size() && rest[i].rfind("-", 0) != 0) cfg["action"] = rest[i++];
  try {
    for (; i < rest.size(); ++i) {
      const std::string& tok = rest[i];
      if (tok.rfind("--", 0) != 0) throw std::runtime_error("unexpected argument '" + tok + "'");
      std::string key = tok.substr(2), value;
      const auto eq = key.find('=');
      if (eq != std::string::npos) {
        value = key.substr(eq + 1);
        key = key.substr(0, eq);
      } else if (i + 1 < rest.size()) {
        value = rest[++i];
      } else {
        throw std::runtime_error("missing value for --" + key);
      }
      cfg["params"][key] = flag_value(value);
    }
  } catch (const std::exception& e) {
    std::cerr << "ConfigError: " << e.what() << "\n";
    return 1;
  }
  if (!cfg.contains("command")) {
    std::cerr << "ConfigError: no subcommand given\n" << app.help();
    return 1;
  }
  cfg["format"] = format;
  if (!output.empty()) cfg["output"] = output;
  if (seed >= 0) cfg["seed"] = seed;
  if (timing) cfg["timing"] = true;

  qcml_context* ctx = qcml_context_new();
  if (!ctx) return 3;
  const qcml_status st = qcml_run(ctx, cfg.dump().c_str());
  if (st == QCML_OK) {
    if (output.empty()) std::cout << (format == "csv" ? qcml_result_csv(ctx) : qcml_result_json(ctx));
  } else {
    std::cerr << qcml_error_kind(ctx) << ": " << qcml_error_message(ctx) << "\n";
  }
  qcml_context_free(ctx);
  return int(st);
}
