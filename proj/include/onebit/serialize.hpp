#pragma once

// JSON views of traces and reports. Uses ordered_json throughout so output
// is reproducible byte for byte.

#include "onebit/harness.hpp"
#include "onebit/recovery.hpp"
#include "onebit/theory.hpp"
#include "onebit/verify.hpp"

#include <json.hpp>

namespace onebit {

inline ordered_json trace_to_json(const RecoveryTrace& trace) {
  ordered_json steps = ordered_json::array();
  for (std::size_t t = 0; t < trace.iterates.size(); ++t) {
    const SparseUnitVector& it = trace.iterates[t];
    ordered_json step;
    step["t"] = t;
    step["support"] = it.support();
    ordered_json values = ordered_json::array();
    for (Index j : it.support()) values.push_back(it.dense()[j]);
    step["values"] = std::move(values);
    if (t < trace.errors.size()) step["d_s"] = trace.errors[t];
    steps.push_back(std::move(step));
  }
  ordered_json j;
  j["schema"] = 1;
  j["trace"] = std::move(steps);
  j["fixed_point_at"] =
      trace.fixed_point_at ? ordered_json(*trace.fixed_point_at) : ordered_json(nullptr);
  j["degenerate_at"] =
      trace.degenerate_at ? ordered_json(*trace.degenerate_at) : ordered_json(nullptr);
  return j;
}

inline ordered_json constants_to_json() {
  const auto& u = constants();
  ordered_json j;
  j["a"] = u.a;
  j["b"] = u.b;
  j["c1"] = u.c1;
  j["c2"] = u.c2;
  j["c3"] = u.c3;
  j["c4"] = u.c4;
  j["c"] = u.c;
  ordered_json checks;
  auto interval = [](double lo, double value, double hi) {
    ordered_json c;
    c["lo"] = lo;
    c["hi"] = hi;
    c["ok"] = lo < value && value < hi;
    return c;
  };
  checks["c1"] = interval(1.3469, u.c1, 1.3470);
  checks["c2"] = interval(0.3806, u.c2, 0.3807);
  checks["c3"] = interval(1.1834, u.c3, 1.1835);
  checks["c4"] = interval(9.0898, u.c4, 9.0899);
  checks["c"] = interval(31.9999, u.c, 32.0001);
  j["checks"] = std::move(checks);
  return j;
}

inline ordered_json audit_report_to_json(const AuditReport& report) {
  ordered_json j;
  j["samples"] = report.samples;
  j["max_ratio"] = report.max_ratio;
  j["violations"] = report.violations;
  ordered_json worst;
  worst["pair_seed"] = report.worst.pair_seed;
  worst["lhs"] = report.worst.lhs;
  worst["rhs"] = report.worst.rhs;
  worst["ratio"] = report.worst.ratio;
  worst["d_s"] = report.worst.d_s;
  worst["J"] = report.worst.J;
  worst["pattern"] = report.worst.pattern;
  j["worst_case"] = std::move(worst);
  return j;
}

inline ordered_json records_to_json(const std::vector<ExperimentRecord>& records) {
  ordered_json arr = ordered_json::array();
  for (const auto& rec : records) {
    ordered_json j;
    j["trial"] = rec.trial;
    j["seed"] = rec.seed;
    j["errors"] = rec.errors;
    j["final_error"] = rec.final_error;
    j["flips"] = rec.flips_used;
    j["degenerate"] = rec.degenerate;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace onebit
