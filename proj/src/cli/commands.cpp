#include "qrsim/cli/commands.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "qrsim/cli/csv.hpp"
#include "qrsim/rgs_optimizer.hpp"
#include "qrsim/sim/sim_1g.hpp"
#include "qrsim/sim/sim_ape.hpp"
#include "qrsim/theory_ape.hpp"

namespace qrsim::cli {
namespace {

constexpr std::uint64_t kDefaultIonIterations = 1500;
constexpr std::uint64_t kDefaultApeSuccesses = 3000;
constexpr std::uint64_t kDefaultApeBudget = 2'000'000;

struct Point {
  std::size_t index = 0;
  double distance_km = 0.0;
  int n = 0;
  RgsParams rgs;
  std::uint64_t seed = 0;
};

std::vector<Point> sweep_points(const RunManifest& m, const Config& cfg) {
  const auto distances =
      m.distances_km.empty() ? std::vector<double>{cfg.topology.chain_length_km} : m.distances_km;
  const auto repeaters =
      m.repeaters.empty() ? std::vector<int>{cfg.topology.n_repeaters} : m.repeaters;
  const auto rgs_list = (m.paradigm == Paradigm::ape && !m.rgs_list.empty())
                            ? m.rgs_list
                            : std::vector<RgsParams>{cfg.rgs};
  std::vector<Point> pts;
  for (double d : distances)
    for (int n : repeaters)
      for (const auto& r : rgs_list) {
        Point p;
        p.index = pts.size();
        p.distance_km = d;
        p.n = n;
        p.rgs = r;
        p.seed = sim::mix_seed(m.seed, p.index);
        pts.push_back(p);
      }
  return pts;
}

ChainTopology topology_for(const Config& cfg, const Point& p) {
  ChainTopology t = cfg.topology;
  t.chain_length_km = p.distance_km;
  t.n_repeaters = p.n;
  try {
    t.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError("/topology/" + e.field(), e.what());
  }
  return t;
}

// Runs fn(i) for i in [0, count) on up to `workers` threads. Exceptions are
// rethrown on the caller in index order.
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn fn) {
  const std::size_t w = std::clamp<std::size_t>(workers < 1 ? 1 : workers, 1, std::max<std::size_t>(count, 1));
  std::vector<std::exception_ptr> errors(count);
  auto guarded = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (w == 1) {
    for (std::size_t i = 0; i < count; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < w; ++k)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) guarded(i);
      });
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::uint64_t ion_iterations(const RunManifest& m) {
  return m.iterations ? m.iterations : kDefaultIonIterations;
}
std::uint64_t ape_budget(const RunManifest& m) {
  return m.iterations ? m.iterations : kDefaultApeBudget;
}
std::uint64_t ape_target(const RunManifest& m) {
  return m.target_successes ? m.target_successes : kDefaultApeSuccesses;
}

std::optional<double> try_fidelity_ape(const ApeParams& p, const ChainTopology& t,
                                       const RgsParams& r) {
  try {
    return fidelity_ape(p, t, r).fbar;
  } catch (const UndefinedFidelity&) {
    return std::nullopt;
  }
}

}  // namespace

int cmd_theory(const RunManifest& m, const Config& cfg, std::ostream& out) {
  const auto pts = sweep_points(m, cfg);
  CsvTable table;
  if (m.paradigm == Paradigm::ion) {
    table.schema = "theory_ion/1";
    table.columns = {"distance_km", "n",       "protocol", "mu",       "p_bsm",
                     "p_suc",       "t_exp_s", "egr_hz",   "fidelity", "fidelity_schedule_model"};
  } else {
    table.schema = "theory_ape/1";
    table.columns = {"distance_km", "n",       "m",    "b0",     "b1",      "photons",
                     "mu",          "p_rgs",   "t_rgs_s", "mq_e", "egr_hz", "fidelity"};
  }
  table.rows.resize(pts.size());
  parallel_for(pts.size(), m.workers, [&](std::size_t i) {
    const Point& pt = pts[i];
    const ChainTopology topo = topology_for(cfg, pt);
    if (m.paradigm == Paradigm::ion) {
      const auto& ion = cfg.trapped_ion;
      const double mu = ion_hop_loss(ion, topo);
      double t_exp, p_suc;
      if (m.protocol == Protocol::two_step) {
        const auto b = expected_cycle_time(ion, topo);
        t_exp = b.t_exp_total;
        p_suc = b.p_suc;
      } else {
        const auto c = expected_cycle_time_hop_by_hop(mu, ion.h_max, topo.n_repeaters,
                                                      ion_timing(ion, topo));
        t_exp = c.t_exp_total;
        p_suc = c.p_suc;
      }
      table.rows[i] = {fmt(pt.distance_km),
                       fmt_int(pt.n),
                       to_string(m.protocol),
                       fmt(mu),
                       fmt(p_bsm_photonic(mu)),
                       fmt(p_suc),
                       fmt(t_exp),
                       fmt(p_suc / t_exp),
                       fmt(expected_fidelity_1g(ion, topo, WaitModel::exact, m.protocol)),
                       fmt(expected_fidelity_1g(ion, topo, WaitModel::expected_schedule,
                                                m.protocol))};
    } else {
      const auto b = egr_ape(cfg.ape, topo, pt.rgs);
      table.rows[i] = {fmt(pt.distance_km), fmt_int(pt.n),      fmt_int(pt.rgs.m),
                       fmt_int(pt.rgs.b0),  fmt_int(pt.rgs.b1), fmt_int(pt.rgs.photon_count()),
                       fmt(b.mu),           fmt(b.p_rgs),       fmt(b.t_rgs_s),
                       fmt_int(b.mq_e),     fmt(b.egr),         fmt(try_fidelity_ape(cfg.ape, topo, pt.rgs))};
    }
  });
  write_csv(out, m, table);
  return kExitOk;
}

int cmd_simulate(const RunManifest& m, const Config& cfg, std::ostream& out) {
  const auto pts = sweep_points(m, cfg);
  const bool want_log = !m.trial_log_path.empty();
  std::vector<std::string> logs(pts.size());
  std::vector<sim::SweepResult> results(pts.size());

  parallel_for(pts.size(), m.workers, [&](std::size_t i) {
    const Point& pt = pts[i];
    const ChainTopology topo = topology_for(cfg, pt);
    std::ostringstream log;
    sim::TrialSink sink;
    if (want_log) {
      nlohmann::ordered_json head = {{"point", pt.index},
                                     {"distance_km", pt.distance_km},
                                     {"n", pt.n},
                                     {"seed", pt.seed}};
      if (m.paradigm == Paradigm::ape) head["rgs"] = {pt.rgs.m, pt.rgs.b0, pt.rgs.b1};
      log << head.dump() << '\n';
      sink = [&log](const sim::TrialRecord& r) { sim::write_trial_jsonl(log, r); };
    }
    if (m.paradigm == Paradigm::ion) {
      results[i] = sim::estimate_1g(cfg.trapped_ion, topo, m.protocol, ion_iterations(m),
                                    pt.seed, sink);
    } else {
      sim::ApeSimOptions opt;
      opt.memory_dephasing = m.memory_dephasing;
      results[i] = sim::estimate_ape(cfg.ape, topo, pt.rgs, ape_target(m), ape_budget(m),
                                     pt.seed, opt, sink);
    }
    if (want_log) logs[i] = log.str();
  });

  CsvTable table;
  bool all_censored = !pts.empty();
  if (m.paradigm == Paradigm::ion) {
    table.schema = "simulate_ion/1";
    table.columns = {"distance_km", "n",          "protocol", "egr_hz",  "fidelity",
                     "fidelity_sem", "iterations", "seed",     "egr_sem", "successes"};
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& r = results[i];
      table.rows.push_back({fmt(pts[i].distance_km), fmt_int(pts[i].n), to_string(m.protocol),
                            fmt(r.egr_hz), fmt(r.fidelity), fmt(r.fidelity_sem),
                            std::to_string(r.iterations), std::to_string(pts[i].seed),
                            fmt(r.egr_sem), std::to_string(r.successes)});
    }
    all_censored = false;
  } else {
    table.schema = "simulate_ape/1";
    table.columns = {"distance_km",  "n",          "m",          "b0",   "b1",
                     "egr_hz",       "success_prob", "fidelity", "fidelity_sem",
                     "iterations",   "censored_flag", "seed",    "success_prob_sem",
                     "successes"};
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& r = results[i];
      const auto& p = pts[i];
      table.rows.push_back({fmt(p.distance_km), fmt_int(p.n), fmt_int(p.rgs.m),
                            fmt_int(p.rgs.b0), fmt_int(p.rgs.b1), fmt(r.egr_hz),
                            fmt(r.success_prob), fmt(r.fidelity), fmt(r.fidelity_sem),
                            std::to_string(r.iterations), r.censored ? "1" : "0",
                            std::to_string(p.seed), fmt(r.success_prob_sem),
                            std::to_string(r.successes)});
      all_censored = all_censored && r.censored;
    }
  }
  write_csv(out, m, table);

  if (want_log) {
    std::ofstream f(m.trial_log_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write trial log " + m.trial_log_path);
    nlohmann::ordered_json head = {{"tool", std::string("qrsim ") + kToolVersion},
                                   {"seed", m.seed},
                                   {"manifest_hash", m.hash()}};
    f << nlohmann::ordered_json{{"header", head}}.dump() << '\n';
    for (const auto& l : logs) f << l;
  }
  return all_censored ? kExitCensoredOnly : kExitOk;
}

namespace {

nlohmann::ordered_json metric(const std::string& name, double theory,
                              std::optional<double> sim_value, double sem, bool& pass) {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["theory"] = theory;
  if (!sim_value) {
    j["sim"] = nullptr;
    j["sem"] = nullptr;
    j["z"] = nullptr;
    j["pass"] = false;
    pass = false;
    return j;
  }
  const double diff = *sim_value - theory;
  double z;
  if (sem > 0.0) {
    z = diff / sem;
  } else {
    z = std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(theory))
            ? 0.0
            : std::numeric_limits<double>::infinity();
  }
  const bool ok = std::abs(z) <= 3.0;
  j["sim"] = *sim_value;
  j["sem"] = sem;
  if (std::isfinite(z)) {
    j["z"] = z;
  } else {
    j["z"] = nullptr;
  }
  j["pass"] = ok;
  pass = pass && ok;
  return j;
}

}  // namespace

int cmd_validate(const RunManifest& m, const Config& theory_cfg, const Config& sim_cfg,
                 std::ostream& out) {
  const auto pts = sweep_points(m, theory_cfg);
  std::vector<nlohmann::ordered_json> reports(pts.size());
  std::vector<char> passed(pts.size(), 0);

  parallel_for(pts.size(), m.workers, [&](std::size_t i) {
    const Point& pt = pts[i];
    const ChainTopology t_topo = topology_for(theory_cfg, pt);
    const ChainTopology s_topo = topology_for(sim_cfg, pt);
    nlohmann::ordered_json rep;
    rep["distance_km"] = pt.distance_km;
    rep["n"] = pt.n;
    rep["seed"] = pt.seed;
    bool ok = true;
    auto metrics = nlohmann::ordered_json::array();
    if (m.paradigm == Paradigm::ion) {
      rep["protocol"] = to_string(m.protocol);
      const auto r = sim::estimate_1g(sim_cfg.trapped_ion, s_topo, m.protocol,
                                      ion_iterations(m), pt.seed);
      rep["iterations"] = r.iterations;
      rep["successes"] = r.successes;
      metrics.push_back(metric("egr_hz", egr_1g(theory_cfg.trapped_ion, t_topo, m.protocol),
                               r.egr_hz, r.egr_sem, ok));
      metrics.push_back(metric(
          "fidelity",
          expected_fidelity_1g(theory_cfg.trapped_ion, t_topo, WaitModel::exact, m.protocol),
          r.fidelity, r.fidelity_sem.value_or(0.0), ok));
    } else {
      rep["rgs"] = {pt.rgs.m, pt.rgs.b0, pt.rgs.b1};
      sim::ApeSimOptions opt;
      opt.memory_dephasing = false;  // the analytic model has no memory term
      const auto r = sim::estimate_ape(sim_cfg.ape, s_topo, pt.rgs, ape_target(m),
                                       ape_budget(m), pt.seed, opt);
      rep["iterations"] = r.iterations;
      rep["successes"] = r.successes;
      rep["censored"] = r.censored;
      const auto b = egr_ape(theory_cfg.ape, t_topo, pt.rgs);
      metrics.push_back(
          metric("success_prob", b.p_rgs, r.success_prob, r.success_prob_sem, ok));
      const auto f = try_fidelity_ape(theory_cfg.ape, t_topo, pt.rgs);
      if (f) {
        metrics.push_back(metric("fidelity", *f, r.fidelity, r.fidelity_sem.value_or(0.0), ok));
      } else {
        ok = false;
        metrics.push_back({{"name", "fidelity"}, {"theory", nullptr}, {"pass", false}});
      }
    }
    rep["metrics"] = metrics;
    rep["result"] = ok ? "PASS" : "FAIL";
    reports[i] = rep;
    passed[i] = ok ? 1 : 0;
  });

  bool all = true;
  for (char p : passed) all = all && p;
  nlohmann::ordered_json doc;
  doc["header"] = {{"tool", std::string("qrsim ") + kToolVersion},
                   {"schema", "validate/1"},
                   {"seed", m.seed},
                   {"manifest_hash", m.hash()},
                   {"manifest", m.to_json()}};
  doc["points"] = reports;
  doc["result"] = all ? "PASS" : "FAIL";
  out << doc.dump(2) << '\n';
  return all ? kExitOk : kExitValidationFailure;
}

int cmd_optimize(const RunManifest& m, const Config& cfg, std::ostream& out) {
  if (m.photon_budget < 6) throw EmptySearch("photon budget below the smallest RGS (6 photons)");
  RunManifest mm = m;
  mm.paradigm = Paradigm::ape;
  mm.rgs_list.clear();
  const auto pts = sweep_points(mm, cfg);
  CsvTable table;
  table.schema = "optimize/1";
  table.columns = {"distance_km", "n", "m", "b0", "b1", "photons", "egr", "baseline_egr"};
  table.rows.resize(pts.size());
  // Parallelism goes to the candidate scan inside each point.
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const ChainTopology topo = topology_for(cfg, pts[i]);
    const auto best = optimize_rgs(cfg.ape, topo, m.photon_budget, m.workers);
    table.rows[i] = {fmt(pts[i].distance_km), fmt_int(pts[i].n),     fmt_int(best.rgs.m),
                     fmt_int(best.rgs.b0),    fmt_int(best.rgs.b1),  fmt_int(best.rgs.photon_count()),
                     fmt(best.egr),           fmt(repeaterless_rate(cfg.ape, topo))};
  }
  write_csv(out, m, table);
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum repeater chain simulator and analytic models"};
  app.require_subcommand(1);

  RunManifest m;
  std::string paradigm = "ion", protocol = "two_step";
  std::string distances, repeaters, rgs;
  bool no_mem = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", m.config_path, "JSON config file");
    sub->add_option("--seed", m.seed, "master seed");
    sub->add_option("--iterations", m.iterations,
                    "iterations (ion) or iteration budget (ape)");
    sub->add_option("--successes", m.target_successes, "success target (ape)");
    sub->add_option("--out", m.out_path, "output file (default stdout)");
    sub->add_option("--workers", m.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--paradigm", paradigm, "ion | ape")
        ->check(CLI::IsMember({"ion", "ape"}));
    sub->add_option("--protocol", protocol, "two_step | hop_by_hop")
        ->check(CLI::IsMember({"two_step", "hop_by_hop"}));
    sub->add_option("--distances", distances, "chain lengths in km, e.g. 10,50,100");
    sub->add_option("--repeaters", repeaters, "repeater counts, e.g. 1..10 or 1,2,4");
    sub->add_option("--rgs", rgs, "RGS shapes m,b0,b1 separated by ';'");
    sub->add_option("--budget", m.photon_budget, "photon budget (optimize)");
    sub->add_option("--set", m.overrides, "config override section.key=<json>");
    sub->add_option("--trial-log", m.trial_log_path, "JSON Lines trial log (simulate)");
    sub->add_flag("--no-memory-dephasing", no_mem, "disable end-node memory dephasing (ape)");
  };
  auto* theory = app.add_subcommand("theory", "closed-form rates and fidelities");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo simulation");
  auto* validate = app.add_subcommand("validate", "cross-validate simulation against theory");
  auto* optimize = app.add_subcommand("optimize", "RGS search under a photon budget");
  for (auto* s : {theory, simulate, validate, optimize}) add_common(s);
  validate->add_option("--sim-set", m.sim_overrides,
                       "override applied to the simulation side only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    m.command = app.get_subcommands().front()->get_name();
    m.paradigm = paradigm_from_string(paradigm);
    m.protocol = protocol_from_string(protocol);
    m.memory_dephasing = !no_mem;
    if (!distances.empty()) m.distances_km = parse_double_list(distances);
    if (!repeaters.empty()) m.repeaters = parse_int_list(repeaters);
    if (!rgs.empty()) m.rgs_list = parse_rgs_list(rgs);
    if (m.command == "optimize") m.paradigm = Paradigm::ape;
    // Record resolved budgets so the manifest fully specifies the run.
    if (m.command == "simulate" || m.command == "validate") {
      if (m.paradigm == Paradigm::ion) {
        m.iterations = ion_iterations(m);
      } else {
        m.iterations = ape_budget(m);
        m.target_successes = ape_target(m);
      }
    }
    const Config cfg = resolve_config(m.config_path, m.overrides);

    std::ofstream file;
    std::ostream* sink = &out;
    if (!m.out_path.empty()) {
      file.open(m.out_path, std::ios::binary);
      if (!file) throw std::runtime_error("cannot write " + m.out_path);
      sink = &file;
    }
    if (m.command == "theory") return cmd_theory(m, cfg, *sink);
    if (m.command == "simulate") return cmd_simulate(m, cfg, *sink);
    if (m.command == "optimize") return cmd_optimize(m, cfg, *sink);
    auto sim_overrides = m.overrides;
    sim_overrides.insert(sim_overrides.end(), m.sim_overrides.begin(), m.sim_overrides.end());
    const Config sim_cfg = resolve_config(m.config_path, sim_overrides);
    return cmd_validate(m, cfg, sim_cfg, *sink);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const InvalidParameter& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

}  // namespace qrsim::cli
