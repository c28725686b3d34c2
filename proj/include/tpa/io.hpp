#pragma once

#include <charconv>
#include <optional>
#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

#include "bounds.hpp"
#include "core.hpp"
#include "omnithermal.hpp"
#include "schedule.hpp"

namespace tpa::io {

using json = nlohmann::json;

namespace schema {
inline constexpr const char* trace = "tpa.trace/1";
inline constexpr const char* pool = "tpa.pool/1";
inline constexpr const char* estimate = "tpa.estimate/1";
inline constexpr const char* ras = "tpa.ras/1";
inline constexpr const char* curve = "tpa.curve/1";
inline constexpr const char* schedule = "tpa.schedule/1";
}  // namespace schema

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline json to_json(const RunTrace& t, std::uint64_t run_index) {
  return {{"schema", schema::trace}, {"run_index", run_index}, {"betas", t.betas}, {"count", t.count}};
}

/// One JSON object per line, run_index = position in the batch.
inline void write_traces(std::ostream& out, std::span<const RunTrace> traces) {
  for (std::size_t i = 0; i < traces.size(); ++i) out << to_json(traces[i], i).dump() << '\n';
}

inline json to_json(const PooledProcess& p) {
  return {{"schema", schema::pool}, {"k", p.k}, {"beta_shell", p.beta_shell}, {"beta_center", p.beta_center}, {"points", p.points}};
}

inline PooledProcess pool_from_json(const json& j) {
  if (j.value("schema", std::string{}) != schema::pool) throw argument_error("pool_from_json: unexpected schema");
  PooledProcess p;
  p.k = j.at("k").get<std::uint64_t>();
  p.beta_shell = j.at("beta_shell").get<double>();
  p.beta_center = j.at("beta_center").get<double>();
  p.points = j.at("points").get<std::vector<double>>();
  return p;
}

inline json to_json(const Interval& i) { return {{"lower", i.lower}, {"upper", i.upper}}; }

inline json to_json(const ConfidenceInterval& ci) {
  return {{"alpha", ci.alpha}, {"log_ratio", to_json(ci.log_ratio)}, {"ratio", to_json(ci.ratio)}};
}

/// Point estimate with both interval styles. The normal interval is null
/// when N = 0.
inline json estimate_report(const PooledProcess& pool, double alpha) {
  const auto est = estimate_log_ratio(pool);
  json j = {{"schema", schema::estimate},
            {"k", est.k},
            {"N", est.n},
            {"log_ratio", est.estimate},
            {"variance", est.variance_estimate},
            {"ratio", std::exp(est.estimate)},
            {"exact_ci", to_json(exact_poisson_ci(pool, alpha))}};
  j["normal_ci"] = pool.n() > 0 ? to_json(normal_ci(pool, alpha)) : json(nullptr);
  return j;
}

inline json to_json(const RasResult& r, double alpha) {
  json j = {{"schema", schema::ras},
            {"status", r.status == RasStatus::ok ? "ok" : "phase1_empty"},
            {"k1", r.k1},
            {"N1", r.n1},
            {"k2", r.k2},
            {"N2", r.n2},
            {"estimate", r.estimate},
            {"total_samples", r.total_samples},
            {"total_draws", r.total_draws}};
  if (r.status == RasStatus::ok) {
    j["exact_ci"] = to_json(exact_poisson_ci(r.phase2, alpha));
    j["normal_ci"] = r.n2 > 0 ? to_json(normal_ci(r.phase2, alpha)) : json(nullptr);
  }
  return j;
}

/// Staircase CSV. One row at the shell, one per distinct breakpoint (value
/// after the jump), one at the center. `estimate` is the ratio reading
/// mu(B)/mu(A(beta)); ln_Z_hat is added for anchored curves.
inline void write_curve_csv(std::ostream& out, const StepFunction& curve) {
  const StepFunction ratio(curve.pool(), StepFunction::Kind::ratio);
  const bool anchored = curve.kind() == StepFunction::Kind::anchored;
  out << "# schema: " << schema::curve << '\n';
  out << "beta,t,N_P,estimate,ln_estimate" << (anchored ? ",ln_Z_hat" : "") << '\n';
  auto row = [&](double beta) {
    const double ln = ratio.log_value(beta);
    out << format_double(beta) << ',' << format_double(curve.beta_shell() - beta) << ',' << ratio.jumps_above(beta) << ','
        << format_double(std::exp(ln)) << ',' << format_double(ln);
    if (anchored) out << ',' << format_double(curve.log_value(beta));
    out << '\n';
  };
  row(curve.beta_shell());
  for (double b : curve.breakpoints()) row(b);
  if (curve.beta_center() < curve.beta_shell()) row(curve.beta_center());
}

inline void write_schedule_csv(std::ostream& out, const CoolingSchedule& s) {
  out << "# schema: " << schema::schedule << '\n';
  out << "index,alpha\n";
  for (std::size_t i = 0; i < s.alphas.size(); ++i) out << i << ',' << format_double(s.alphas[i]) << '\n';
}

}  // namespace tpa::io
