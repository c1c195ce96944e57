#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kencl/geometry.hpp"

namespace kencl {

struct EigenRecord {
  ComplexPoint value;
  bool nonreal = false;
  /// Non-real: inside every enclosure checked. Real: not applicable (true).
  bool contained = true;
  /// Signed margin against the tightest enclosure checked (<= 0 inside); NaN-free.
  double margin = 0.0;
  /// (Jf, f) / ||f||^2 for real eigenvalues that were sign-tested.
  std::optional<double> krein_sign;
  /// "positive", "negative", "indeterminate", "untested" or "failed".
  std::string sign_status = "untested";
};

struct Failure {
  std::string check;
  std::string detail;
};

struct CheckSummary {
  long checked = 0;
  long failures = 0;
  long indeterminate = 0;
  /// Largest ratio observed/allowed (resolvent) or largest margin (containment).
  std::optional<double> worst;

  void observe(double v) { worst = worst ? std::max(*worst, v) : v; }
};

struct VerificationReport {
  nlohmann::json instance = nlohmann::json::object();
  nlohmann::json bounds = nlohmann::json::object();
  std::vector<EigenRecord> eigenvalues;
  int nonreal_count = 0;
  std::vector<Failure> containment_failures;
  std::vector<Failure> resolvent_failures;
  std::vector<Failure> sign_failures;
  CheckSummary containment;
  CheckSummary resolvent;
  CheckSummary sign;
  /// Producer-specific data (curves, regions, ...).
  nlohmann::json extra = nlohmann::json::object();
  /// Hypotheses unmet: the instance was not checked.
  bool rejected = false;
  std::string rejection_reason;

  bool verified() const {
    return !rejected && containment_failures.empty() && resolvent_failures.empty() &&
           sign_failures.empty();
  }
  std::size_t failure_count() const {
    return containment_failures.size() + resolvent_failures.size() + sign_failures.size();
  }

  void fail_containment(std::string detail);
  void fail_resolvent(std::string detail);
  void fail_sign(std::string detail);

  /// Serialization; throws std::domain_error if any number is NaN.
  nlohmann::json to_json() const;
};

/// Throws std::domain_error when the document contains a NaN or infinity.
void require_finite_json(const nlohmann::json& j, const std::string& where = "$");

}  // namespace kencl
