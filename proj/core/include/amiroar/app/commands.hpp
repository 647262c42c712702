#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

// Subcommands of the ami-roar tool. Each returns the process exit code:
// 0 success, 1 a negative result (invalid playbook, failed playbook run,
// malformed capture), 2 a usage, configuration or I/O error.
namespace amiroar::app {

inline constexpr const char* kOutEnv = "AMI_ROAR_OUT";

/// `flag` if set, else $AMI_ROAR_OUT, else `fallback`.
std::filesystem::path resolve_out_dir(const std::optional<std::string>& flag, const std::filesystem::path& fallback);

int cmd_validate(const std::filesystem::path& playbook, std::ostream& out, std::ostream& err);

struct SimulateOptions {
  std::filesystem::path scenario;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  std::optional<double> clock_scale;
  std::optional<double> baseline_hours;
};
int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err);

/// Detection over a capture with the model persisted next to it (or
/// `model`). CEF lines go to `out` and, when `out_dir` is set, to
/// `<out_dir>/alerts.cef`.
int cmd_replay(const std::filesystem::path& capture, const std::optional<std::filesystem::path>& model,
               const std::optional<std::filesystem::path>& out_dir, std::ostream& out, std::ostream& err);

int cmd_metrics(const std::filesystem::path& dir, double baseline_hours, std::ostream& out, std::ostream& err);

/// Blocks serving the switch API for the scenario's hosts (or an empty
/// switch) until the process is stopped.
int cmd_serve(const std::optional<std::filesystem::path>& scenario, const std::string& host, int port,
              std::ostream& out, std::ostream& err);

}  // namespace amiroar::app
