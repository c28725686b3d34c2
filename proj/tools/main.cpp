// tpa: command-line driver for Tootsie Pop Algorithm experiments.
//
// Exit codes: 0 success, 1 a diagnose battery failed, 2 configuration or
// domain error, 3 sampler contract violation.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <tpa/tpa.hpp>

#include "families.hpp"

namespace {

using nlohmann::json;
using namespace tpa;
using tpa::cli::AnyFamily;
using tpa::cli::config_error;
using tpa::cli::ExperimentConfig;

constexpr int exit_ok = 0;
constexpr int exit_battery_failed = 1;
constexpr int exit_config = 2;
constexpr int exit_sampler = 3;

class Output {
 public:
  explicit Output(const std::string& dir) : dir_(dir) { std::filesystem::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw config_error("cannot write " + (dir_ / name).string());
    out << content;
  }

  void write_json(const std::string& name, const json& j) const { write(name, j.dump(2) + "\n"); }

 private:
  std::filesystem::path dir_;
};

std::uint64_t require_seed(const ExperimentConfig& c) {
  if (!c.seed) throw config_error("--seed is required");
  return *c.seed;
}

RunOptions run_options(const ExperimentConfig& c) { return {c.max_steps, c.workers}; }

json header(const ExperimentConfig& c, const AnyFamily& fam, const char* mode) {
  return {{"mode", mode}, {"seed", *c.seed}, {"family", cli::describe(fam)}};
}

template <typename F>
std::function<double(double)> oracle_of(const F& fam) {
  if constexpr (LogMeasureOracle<F>) return [&fam](double b) { return fam.log_measure(b); };
  else return nullptr;
}

int cmd_run(const ExperimentConfig& c) {
  const Streams streams{require_seed(c)};
  const AnyFamily fam = cli::make_family(c);
  const Output out(c.out_dir);
  return std::visit(
      [&](const auto& f) {
        const auto traces = run_batch(f, streams, c.k, run_options(c));
        const auto pool = pool_runs(std::span<const RunTrace>(traces), f);
        std::ostringstream tr;
        io::write_traces(tr, traces);
        out.write("traces.jsonl", tr.str());
        out.write_json("pool.json", io::to_json(pool));
        json report = io::estimate_report(pool, c.alpha);
        report["run"] = header(c, fam, "run");
        out.write_json("estimate.json", report);
        std::ostringstream curve;
        io::write_curve_csv(curve, anchored_partition_curve(pool, cli::log_center_measure(fam)));
        out.write("curve.csv", curve.str());
        std::cout << report.dump(2) << '\n';
        return exit_ok;
      },
      fam);
}

int cmd_ras(const ExperimentConfig& c) {
  if (!c.epsilon) throw config_error("ras mode requires --epsilon");
  if (!c.delta) throw config_error("ras mode requires --delta");
  const Streams streams{require_seed(c)};
  const AnyFamily fam = cli::make_family(c);
  const Output out(c.out_dir);
  return std::visit(
      [&](const auto& f) {
        json report;
        if (c.small_ratio) {
          const auto ar = ar_ratio_estimate(f, *c.epsilon, *c.delta, streams);
          report = {{"schema", io::schema::ras},
                    {"method", "accept_reject"},
                    {"estimate", ar.infinite ? json("inf") : json(ar.estimate)},
                    {"p_hat", ar.p_hat},
                    {"samples", ar.samples},
                    {"hits", ar.hits},
                    {"infinite", ar.infinite}};
        } else {
          RasConfig rc{*c.epsilon, *c.delta, true};
          const auto r = run_ras(f, rc, streams, run_options(c));
          report = io::to_json(r, c.alpha);
          report["method"] = "two_phase";
          report["epsilon_a"] = rc.epsilon_a();
        }
        report["run"] = header(c, fam, "ras");
        out.write_json("ras.json", report);
        std::cout << report.dump(2) << '\n';
        return exit_ok;
      },
      fam);
}

int cmd_schedule(const ExperimentConfig& c) {
  const Streams streams{require_seed(c)};
  const AnyFamily fam = cli::make_family(c);
  const Output out(c.out_dir);
  return std::visit(
      [&](const auto& f) {
        const auto pool = sample_pool(f, streams, c.k, run_options(c));
        const auto sched = build_schedule(pool, c.rung_k.value_or(static_cast<std::int64_t>(c.k)));
        out.write_json("pool.json", io::to_json(pool));
        std::ostringstream csv;
        io::write_schedule_csv(csv, sched);
        out.write("schedule.csv", csv.str());
        json report = {{"schema", io::schema::schedule}, {"k_used", sched.k_used}, {"alphas", sched.alphas}, {"run", header(c, fam, "schedule")}};
        if (auto oracle = oracle_of(f)) {
          const auto q = schedule_quality(sched, oracle);
          report["quality"] = {{"gaps", q.gaps}, {"interior_rungs", q.interior_rungs}, {"interior_mean", q.interior_mean}, {"interior_sd", q.interior_sd}};
        }
        out.write_json("schedule.json", report);
        std::cout << report.dump(2) << '\n';
        return exit_ok;
      },
      fam);
}

int cmd_omni(const ExperimentConfig& c) {
  const Streams streams{require_seed(c)};
  const AnyFamily fam = cli::make_family(c);
  // Reject a bad plan request before spending samples on it.
  if (c.epsilon) plan_runs(*c.epsilon, c.delta.value_or(0.05), c.lambda_upper.value_or(2.0));
  const Output out(c.out_dir);
  return std::visit(
      [&](const auto& f) {
        const auto pool = sample_pool(f, streams, c.k, run_options(c));
        const auto curve = anchored_partition_curve(pool, cli::log_center_measure(fam));
        out.write_json("pool.json", io::to_json(pool));
        std::ostringstream csv;
        io::write_curve_csv(csv, curve);
        out.write("curve.csv", csv.str());
        json report = {{"schema", io::schema::curve},
                       {"k", pool.k},
                       {"N", pool.n()},
                       {"ratio_at_center", omnithermal_estimate(pool, pool.beta_center)},
                       {"ln_Z_hat_at_shell", curve.log_value(pool.beta_shell)},
                       {"run", header(c, fam, "omni")}};
        if (c.epsilon) {
          const double delta = c.delta.value_or(0.05);
          // Without an explicit bound, use the upper end of the exact interval at level delta.
          const double lambda_upper = c.lambda_upper.value_or(exact_poisson_ci(pool, delta).log_ratio.upper);
          if (lambda_upper > 1.0) {
            const auto plan = plan_runs(*c.epsilon, delta, lambda_upper);
            report["plan"] = {{"epsilon", plan.epsilon}, {"delta", plan.delta}, {"lambda_upper", plan.lambda_upper}, {"k_required", plan.k_required}};
          } else {
            report["plan"] = {{"skipped", "lambda upper bound <= 1"}, {"lambda_upper", lambda_upper}};
          }
        }
        out.write_json("omni.json", report);
        std::cout << report.dump(2) << '\n';
        return exit_ok;
      },
      fam);
}

int cmd_evidence(const ExperimentConfig& c) {
  const Streams streams{require_seed(c)};
  const AnyFamily fam = cli::make_family(c);
  const Output out(c.out_dir);
  json report;
  if (const auto* ball = std::get_if<posterior::L1BallFamily>(&fam)) {
    const auto e = posterior::evidence_estimate(*ball, c.k, c.n_center, streams, run_options(c), c.m_bound);
    report = {{"method", "tpa_times_center"},
              {"evidence", e.evidence},
              {"ratio", e.ratio},
              {"k", e.log_ratio.k},
              {"N", e.log_ratio.n},
              {"center", {{"value", e.center.value}, {"samples", e.center.samples}, {"std_error_bound", e.center.std_error_bound}, {"bound_violations", e.center.bound_violations}}},
              {"truncation_error", e.truncation_error}};
    if (ball->density().kind != posterior::Density::Kind::custom)
      report["closed_form"] = std::exp(ball->log_measure(ball->beta_shell()));
  } else if (const auto* gibbs = std::get_if<ising::GibbsFamily>(&fam)) {
    if (!c.observed_h) throw config_error("evidence on ising requires --observed-h");
    const double b_max = c.b_max.value_or(gibbs->beta_shell());
    const auto pool = sample_pool(*gibbs, streams, c.k, run_options(c));
    const auto curve = anchored_partition_curve(pool, cli::log_center_measure(fam));
    const auto prior = Prior::uniform(0.0, b_max);
    const auto ev = evidence_integral(curve, prior, *c.observed_h, b_max, c.quad_step);
    report = {{"method", "omnithermal_quadrature"}, {"evidence", ev.value}, {"step", ev.step}, {"intervals", ev.intervals}, {"k", pool.k}, {"N", pool.n()}, {"prior", {{"uniform", {0.0, b_max}}}}};
    // Same quadrature against the enumerated partition function.
    const auto& spectrum = gibbs->spectrum();
    double sum = 0.0;
    for (std::size_t i = 0; i <= ev.intervals; ++i) {
      const double b = i == ev.intervals ? b_max : static_cast<double>(i) * ev.step;
      const double w = (i == 0 || i == ev.intervals) ? 0.5 : 1.0;
      sum += w * prior.density(b) * std::exp(-b * *c.observed_h - spectrum.partition(b).log_value);
    }
    report["enumerated"] = sum * ev.step;
  } else {
    throw config_error("evidence mode supports the l1ball and ising families");
  }
  report["schema"] = "tpa.evidence/1";
  report["run"] = header(c, fam, "evidence");
  out.write_json("evidence.json", report);
  std::cout << report.dump(2) << '\n';
  return exit_ok;
}

int cmd_diagnose(const ExperimentConfig& c) {
  const Streams streams{require_seed(c)};
  const AnyFamily fam = cli::make_family(c);
  const Output out(c.out_dir);
  constexpr double level = 0.001;
  return std::visit(
      [&](const auto& f) -> int {
        const auto oracle = oracle_of(f);
        if (!oracle) throw unsupported_error("diagnose: family has no log-measure oracle");
        const double lambda = oracle(f.beta_shell()) - oracle(f.beta_center());
        if (!(lambda > 0.0)) throw config_error("diagnose: shell and center coincide");

        std::vector<RunTrace> all;
        std::vector<std::uint64_t> increments;
        std::vector<double> inc_a, inc_b;
        const double window = std::min(1.0, lambda);
        for (std::uint64_t rep = 0; rep < c.reps; ++rep) {
          auto traces = run_batch(f, streams.child(rep), c.k, run_options(c));
          const auto pool = pool_runs(std::span<const RunTrace>(traces), f);
          const auto inc = window_increments(pool, oracle, window);
          increments.insert(increments.end(), inc.begin(), inc.end());
          for (std::size_t j = 0; j + 1 < inc.size(); ++j) {
            inc_a.push_back(static_cast<double>(inc[j]));
            inc_b.push_back(static_cast<double>(inc[j + 1]));
          }
          std::move(traces.begin(), traces.end(), std::back_inserter(all));
        }

        const auto spacing = spacing_diagnostic(std::span<const RunTrace>(all), f, level);
        std::vector<std::uint64_t> counts;
        for (const auto& t : all) counts.push_back(t.count);
        const auto count_gof = stats::poisson_gof(counts, lambda, level);
        const auto inc_gof = stats::poisson_gof(increments, static_cast<double>(c.k) * window, level);

        json inc_report = {{"window", window}, {"chi_square", inc_gof.statistic}, {"dof", inc_gof.dof}, {"p_value", inc_gof.p_value}};
        bool inc_pass = inc_gof.passed;
        if (inc_a.size() >= 3) {
          // Adjacent-window correlation; |r| sqrt(n) is approximately standard normal under independence.
          const double ma = stats::mean(inc_a), mb = stats::mean(inc_b);
          double sab = 0, saa = 0, sbb = 0;
          for (std::size_t i = 0; i < inc_a.size(); ++i) {
            sab += (inc_a[i] - ma) * (inc_b[i] - mb);
            saa += (inc_a[i] - ma) * (inc_a[i] - ma);
            sbb += (inc_b[i] - mb) * (inc_b[i] - mb);
          }
          const double r = (saa > 0 && sbb > 0) ? sab / std::sqrt(saa * sbb) : 0.0;
          const double z = std::abs(r) * std::sqrt(static_cast<double>(inc_a.size()));
          const bool indep = z < stats::normal_upper_quantile(level / 2.0);
          inc_report["lag1_correlation"] = r;
          inc_report["independence_passed"] = indep;
          inc_pass = inc_pass && indep;
        }
        inc_report["passed"] = inc_pass;

        json report = {
            {"schema", "tpa.diagnose/1"},
            {"lambda", lambda},
            {"level", level},
            {"runs", all.size()},
            {"spacings_ks", {{"n", spacing.ks.n}, {"statistic", spacing.ks.statistic}, {"critical_value", spacing.ks.critical_value}, {"p_value", spacing.ks.p_value}, {"low_power", spacing.ks.low_power}, {"passed", spacing.ks.passed}}},
            {"count_chi_square", {{"statistic", count_gof.statistic}, {"dof", count_gof.dof}, {"p_value", count_gof.p_value}, {"passed", count_gof.passed}}},
            {"increments", inc_report},
            {"run", header(c, fam, "diagnose")}};
        const bool all_passed = spacing.ks.passed && count_gof.passed && inc_pass;
        report["all_passed"] = all_passed;
        out.write_json("diagnose.json", report);
        std::cout << report.dump(2) << '\n';
        return all_passed ? exit_ok : exit_battery_failed;
      },
      fam);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tootsie Pop Algorithm experiments: log-ratio estimates, (eps,delta) schemes, cooling schedules, omnithermal curves"};
  app.set_config("--config", "", "key = value config file; command-line flags override it");
  app.fallthrough();
  app.require_subcommand(1);

  ExperimentConfig c;
  app.add_option("--family", c.family, "expinterval | ising | l1ball")->check(CLI::IsMember({"expinterval", "ising", "l1ball"}));
  app.add_option("--shell", c.shell, "expinterval: beta of the shell");
  app.add_option("--center", c.center, "expinterval: beta of the center");
  app.add_option("--width", c.width, "ising: lattice width");
  app.add_option("--height", c.height, "ising: lattice height");
  app.add_flag("--wrap", c.wrap, "ising: periodic boundary");
  app.add_option("--edges", c.edges_file, "ising: edge-list file, one 'u v' pair per line");
  app.add_option("--beta", c.beta, "ising: inverse temperature of the shell");
  app.add_option("--dim", c.dim, "l1ball: dimension");
  app.add_option("--center-point", c.center_point, "l1ball: ball center (default origin)");
  app.add_option("--eps", c.eps, "l1ball: center radius");
  app.add_option("--radius", c.radius, "l1ball: shell radius");
  app.add_option("--density", c.density, "l1ball: laplace | uniform");
  app.add_option("--norm", c.norm, "l1ball: l1 | box");
  app.add_option("--m-bound", c.m_bound, "l1ball: M with M/2 <= f <= M on the center ball");
  app.add_option("--seed", c.seed, "master seed (required)");
  app.add_option("--k", c.k, "number of TPA runs");
  app.add_option("--epsilon", c.epsilon, "relative error target");
  app.add_option("--delta", c.delta, "failure probability");
  app.add_option("--alpha", c.alpha, "confidence intervals at level 1 - alpha");
  app.add_option("--workers", c.workers, "worker threads (0 = all cores)");
  app.add_option("--max-steps", c.max_steps, "step cap per run");
  app.add_option("--out-dir", c.out_dir, "output directory")->envname("TPA_OUT_DIR");
  app.add_option("--rung-k", c.rung_k, "schedule: pooled points per rung (default k)");
  app.add_option("--lambda-upper", c.lambda_upper, "omni: upper bound on ln(mu(B)/mu(B')) for the run planner");
  app.add_option("--n-center", c.n_center, "evidence: center-ball sample count");
  app.add_option("--observed-h", c.observed_h, "evidence (ising): H(X) of the observed configuration");
  app.add_option("--b-max", c.b_max, "evidence (ising): upper end of the prior (default --beta)");
  app.add_option("--quad-step", c.quad_step, "evidence (ising): trapezoid step");
  app.add_option("--reps", c.reps, "diagnose: repetitions of k runs");
  app.add_flag("--small-ratio", c.small_ratio, "ras: ratio below e, use acceptance-rejection");

  auto* run = app.add_subcommand("run", "k runs: traces, pooled points, estimate with both intervals, staircase CSV");
  auto* ras = app.add_subcommand("ras", "two-phase (epsilon, delta) approximation");
  auto* schedule = app.add_subcommand("schedule", "well-balanced cooling schedule from pooled runs");
  auto* omni = app.add_subcommand("omni", "omnithermal curve and run planner");
  auto* evidence = app.add_subcommand("evidence", "Bayesian evidence estimate");
  auto* diagnose = app.add_subcommand("diagnose", "spacing, count and increment test batteries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (*run) return cmd_run(c);
    if (*ras) return cmd_ras(c);
    if (*schedule) return cmd_schedule(c);
    if (*omni) return cmd_omni(c);
    if (*evidence) return cmd_evidence(c);
    if (*diagnose) return cmd_diagnose(c);
  } catch (const tpa::sampler_error& e) {
    std::cerr << "sampler error: " << e.what() << '\n';
    return exit_sampler;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  }
  return exit_config;
}
