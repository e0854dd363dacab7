#pragma once

// The acceptance battery: twelve seeded checks, each reporting pass/fail and
// the measured quantities behind the verdict.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace sigmaflow {

struct VerifyOptions {
  std::uint64_t seed = 20240601;
  double tol_scale = 1.0;  // multiplies every acceptance tolerance
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  nlohmann::json metrics = nlohmann::json::object();
  std::string detail;
};

inline constexpr int kCriterionCount = 12;

// Runs one criterion in isolation (1..12). Criterion 12 reruns 1..11 twice.
CriterionResult run_criterion(int id, const VerifyOptions& options);

struct VerifyReport {
  std::vector<CriterionResult> criteria;
  bool pass() const;
  std::vector<int> failed() const;
};

VerifyReport verify_all(const VerifyOptions& options);
nlohmann::json to_json(const CriterionResult& r);
nlohmann::json to_json(const VerifyReport& r, const VerifyOptions& options);
// Canonical text of the report: no timings, fixed key order, trailing newline.
std::string report_text(const VerifyReport& r, const VerifyOptions& options);

}  // namespace sigmaflow
