#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ustlab::cli {

inline constexpr const char* kSchemaName = "ustlab.result";
inline constexpr const char* kSchemaVersion = "1.0";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitGuard = 3;

struct RunConfig {
  std::string command;
  std::string domain;
  std::optional<std::string> delta;
  std::vector<std::string> marks;  // extra "x,y,role" marks
  std::string pattern;
  std::string upper;
  std::string omega;
  std::vector<std::string> deltas{"1/16", "1/32", "1/64"};
  std::uint64_t samples = 10000;
  std::uint64_t seed = 1;
  int workers = 0;  // 0: USTLAB_WORKERS or the hardware concurrency
  std::string out;
  std::string format = "json";
  std::string backend = "auto";
  int n = 2;
  int nprime = 1;
  std::vector<double> points;
  int configs = 0;  // 0: per-check default
  bool pde2 = false, pde3 = false, covariance = false, asy2 = false, asymptotics = false;
  bool kernel = false;
  std::string kind = "tree";
};

// Validates the config and runs one command; results go to out (or the --out
// file), diagnostics to err.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses argv-style arguments (without the program name) and runs.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ustlab::cli
