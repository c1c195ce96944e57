#include "kencl/verification_report.hpp"

#include <cmath>
#include <stdexcept>

namespace kencl {

namespace {

nlohmann::json summary_json(const CheckSummary& s) {
  nlohmann::json j{{"checked", s.checked}, {"failures", s.failures}, {"indeterminate", s.indeterminate}};
  j["worst"] = s.worst ? nlohmann::json(*s.worst) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json failures_json(const std::vector<Failure>& fs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : fs) arr.push_back({{"check", f.check}, {"detail", f.detail}});
  return arr;
}

}  // namespace

void VerificationReport::fail_containment(std::string detail) {
  ++containment.failures;
  containment_failures.push_back({"containment", std::move(detail)});
}

void VerificationReport::fail_resolvent(std::string detail) {
  ++resolvent.failures;
  resolvent_failures.push_back({"resolvent", std::move(detail)});
}

void VerificationReport::fail_sign(std::string detail) {
  ++sign.failures;
  sign_failures.push_back({"signType", std::move(detail)});
}

void require_finite_json(const nlohmann::json& j, const std::string& where) {
  if (j.is_number_float()) {
    if (!std::isfinite(j.get<double>()))
      throw std::domain_error("non-finite number at " + where);
  } else if (j.is_object()) {
    for (const auto& [k, v] : j.items()) require_finite_json(v, where + "." + k);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) require_finite_json(j[i], where + "[" + std::to_string(i) + "]");
  }
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json eig = nlohmann::json::array();
  double mmin = 0.0, mmax = 0.0, msum = 0.0;
  int mcount = 0;
  for (const auto& e : eigenvalues) {
    nlohmann::json r{{"re", e.value.real()}, {"im", e.value.imag()}, {"nonreal", e.nonreal},
                     {"contained", e.contained}, {"margin", e.margin}, {"signStatus", e.sign_status}};
    r["kreinSign"] = e.krein_sign ? nlohmann::json(*e.krein_sign) : nlohmann::json(nullptr);
    eig.push_back(std::move(r));
    if (e.nonreal) {
      mmin = mcount ? std::min(mmin, e.margin) : e.margin;
      mmax = mcount ? std::max(mmax, e.margin) : e.margin;
      msum += e.margin;
      ++mcount;
    }
  }
  nlohmann::json margins{{"count", mcount}};
  if (mcount) {
    margins["min"] = mmin;
    margins["max"] = mmax;
    margins["mean"] = msum / mcount;
  }
  nlohmann::json j{
      {"instance", instance},
      {"bounds", bounds},
      {"eigenvalues", eig},
      {"nonrealCount", nonreal_count},
      {"margins", margins},
      {"checks",
       {{"containment", summary_json(containment)},
        {"resolvent", summary_json(resolvent)},
        {"signType", summary_json(sign)}}},
      {"failures",
       {{"containment", failures_json(containment_failures)},
        {"resolvent", failures_json(resolvent_failures)},
        {"signType", failures_json(sign_failures)}}},
      {"rejected", rejected},
      {"verified", verified()},
  };
  if (rejected) j["rejectionReason"] = rejection_reason;
  if (!extra.empty()) j["extra"] = extra;
  require_finite_json(j);
  return j;
}

}  // namespace kencl
