#pragma once

// Command-line dispatch: parse flags, load the config, run one pipeline and
// write its JSON summary and CSV traces.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace sigmaflow {

struct RunConfig {
  std::string command;  // check-operator | toric-stability | flow | solve-model | solve-toric | continuity | legendre | verify-all
  std::filesystem::path config;
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  bool expect_stable = false;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int math_failure = 1;
inline constexpr int input_error = 2;
}  // namespace exit_code

int dispatch(const RunConfig& config);
// Parses argv, honors SIGMAFLOW_THREADS, returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace sigmaflow
