// One line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <map>

#include "sigmaflow/verify.hpp"

using namespace sigmaflow;

int main() {
  // Wall-clock budgets in seconds; flow is per run, two runs.
  const std::map<int, double> budget{{1, 5.0}, {2, 10.0}, {6, 120.0}};
  const VerifyOptions options;
  int failures = 0;
  for (int id = 1; id <= kCriterionCount; ++id) {
    const auto t0 = std::chrono::steady_clock::now();
    const CriterionResult r = run_criterion(id, options);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = r.pass;
    std::string note;
    if (auto it = budget.find(id); it != budget.end() && secs > it->second) {
      pass = false;
      note = " (over time budget)";
    }
    failures += !pass;
    std::printf("criterion %2d %-22s %s  %.2fs%s\n", id, r.name.c_str(), pass ? "PASS" : "FAIL", secs, note.c_str());
    if (!pass) std::printf("    %s\n", to_json(r).dump().c_str());
  }
  return failures == 0 ? 0 : 1;
}
