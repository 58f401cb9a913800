#include "resest_cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "resest/errors.hpp"
#include "resest/estimator.hpp"
#include "resest/graph.hpp"
#include "resest/median.hpp"
#include "resest/scenario_io.hpp"
#include "resest/sim.hpp"

namespace resest::cli {

namespace fs = std::filesystem;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return kInputError;
    case ErrorKind::Audit: return kAuditFailure;
    case ErrorKind::Numerical: return kNumericalFailure;
  }
  return kNumericalFailure;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const NumericalBlowup& e) {
    err << "numerical failure: " << e.what() << "\nlast stable time: " << e.last_stable_time() << "\n";
    return kNumericalFailure;
  } catch (const AuditFailure& e) {
    err << "audit failure: " << e.what() << "\n(use --force to run anyway)\n";
    return kAuditFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

fs::path resolve_out_dir(const std::optional<fs::path>& given) {
  const fs::path dir = given ? *given : default_output_dir();
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ScenarioError("cannot write '" + path.string() + "'");
  return f;
}

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

void print_metrics(const WindowMetrics& m, std::ostream& out) {
  out << "  window [" << m.t_from << ", " << m.t_to << "]\n"
      << "    max_i sup ||xhat_i - x||_inf = " << m.max_inf_error << "\n"
      << "    max_i sup ||xhat_i - x||_2   = " << m.max_euclid_error << "\n"
      << "    sup W = " << m.sup_W << "   sup V = " << m.sup_V << "\n"
      << "    residual sup per agent:";
  for (double r : m.residual_sup) out << " " << r;
  out << "\n";
}

std::string tag(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

fs::path default_output_dir() {
  if (const char* env = std::getenv("RESEST_OUT_DIR"); env != nullptr && *env != '\0') return fs::path(env);
  return fs::path(".");
}

int cmd_audit(const fs::path& scenario, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario sc = load_scenario(scenario);
    const AuditReport report = audit_assumptions(sc);
    out << "scenario: " << (sc.name.empty() ? scenario.string() : sc.name) << "\n" << report.to_text();
    out << (report.all_pass() ? "all assumptions hold\n" : "assumption audit FAILED\n");
    return report.all_pass() ? kOk : kAuditFailure;
  });
}

int cmd_median(const MedianOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::size_t n = 0;
    if (opt.nodes)
      n = *opt.nodes;
    else if (!opt.z.empty())
      n = opt.z.size();
    else if (!opt.s.empty())
      n = opt.s.size();
    else
      throw DomainError("give the values with --z or the node count with --n");

    MedianProblem problem;
    problem.values = opt.z;
    if (problem.values.empty())
      for (std::size_t i = 0; i < n; ++i) problem.values.push_back(static_cast<double>(i));
    problem.indicators = opt.s.empty() ? std::vector<int>(problem.values.size(), 1) : opt.s;
    problem.topology = Topology::preset(opt.topology, n);
    problem.gamma = opt.gamma;
    problem.validate();

    Vector x0 = Vector::Zero(static_cast<Eigen::Index>(n));
    if (!opt.x0.empty()) {
      if (opt.x0.size() != n) throw DimensionError("--x0 needs one entry per node");
      x0 = Eigen::Map<const Vector>(opt.x0.data(), static_cast<Eigen::Index>(n));
    }

    MedianRunOptions ro;
    ro.horizon = opt.horizon > 0.0 ? opt.horizon : default_median_horizon(problem, x0, opt.tail_fraction);
    ro.dt = opt.dt;
    ro.tail_fraction = opt.tail_fraction;
    // Keep the CSV around ten thousand rows; the tail sup still sees every step.
    ro.record_every = std::max<std::size_t>(1, static_cast<std::size_t>(ro.horizon / ro.dt / 10000.0));
    const MedianRun run = run_median_solver(problem, x0, ro);

    out << std::setprecision(8);
    out << "nodes: " << n << "  topology: " << opt.topology << "  gamma: " << opt.gamma << "\n"
        << "lambda_2: " << run.lambda2 << "\n"
        << "median set: [" << run.median.lower << ", " << run.median.upper << "]\n"
        << "horizon: " << ro.horizon << "  dt: " << ro.dt << "  tail from t = " << run.tail_start << "\n"
        << "median bound 2 sqrt(N)/(gamma lambda_2): " << run.bound << "\n"
        << "measured tail distance: " << run.tail_distance << "  "
        << verdict(run.tail_distance <= run.bound) << "\n";

    const fs::path csv = opt.csv ? *opt.csv : resolve_out_dir(std::nullopt) / "median.csv";
    if (csv == "-") {
      write_median_csv(run, out);
    } else {
      if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
      auto f = open_output(csv);
      write_median_csv(run, f);
      out << "trajectory: " << csv.string() << "\n";
    }
    return kOk;
  });
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Scenario sc = load_scenario(opt.scenario);
    if (opt.force) sc.sim.override_audit = true;
    if (opt.dt) sc.sim.dt = *opt.dt;
    if (opt.horizon) sc.sim.horizon = *opt.horizon;
    if (opt.decimation) sc.sim.decimation = *opt.decimation;
    sc.validate();

    const TrajectoryLog log = run_scenario(sc);
    const WindowMetrics tail = tail_metrics(log, sc.sim.tail_fraction);
    std::vector<WindowMetrics> windows;
    for (const auto& [t0, t1] : sc.windows) windows.push_back(window_metrics(log, t0, t1));

    const fs::path dir = resolve_out_dir(opt.out_dir);
    const std::string stem = opt.scenario.stem().string();
    const fs::path csv = dir / (stem + ".csv");
    const fs::path side = dir / (stem + ".json");
    {
      auto f = open_output(csv);
      write_log_csv(log, f);
    }
    {
      auto f = open_output(side);
      f << sidecar_json(sc, log, tail, windows);
    }

    out << std::setprecision(8);
    out << "scenario: " << (sc.name.empty() ? stem : sc.name) << "  seed: " << log.seed << "\n";
    if (log.assumption_violating) out << "assumption-violating: the audit failed and the run was forced\n";
    out << log.audit.to_text();
    for (const EventAudit& e : log.event_audits)
      out << "event t = " << e.t << ": " << (e.action == Event::Action::Join ? "join" : "leave")
          << " agent " << e.agent + 1 << "  connected=" << e.connected << " redundant=" << e.redundant
          << " lambda_2=" << e.lambda2 << "  " << verdict(e.pass()) << "\n";
    if (log.weight_coupling && *log.weight_coupling > 1e-9)
      out << "warning: sqrt(V^T P V) couples directions with different indicator patterns (relative size "
          << *log.weight_coupling << "); choose P so that V^T P V is block diagonal, e.g. P = W^T W\n";
    out << "tail metrics:\n";
    print_metrics(tail, out);
    for (const WindowMetrics& w : windows) print_metrics(w, out);
    if (log.theorem3)
      out << "global error bound: " << *log.theorem3 << "  tail Euclidean error: " << tail.max_euclid_error
          << "  " << verdict(tail.max_euclid_error <= *log.theorem3) << "\n";
    if (log.w_bound)
      out << "disagreement bound: " << *log.w_bound << "  tail sup W: " << tail.sup_W << "  "
          << verdict(tail.sup_W <= *log.w_bound) << "\n";
    out << "log: " << csv.string() << "\nsidecar: " << side.string() << "\n";
    return kOk;
  });
}

int cmd_bounds(const BoundsOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.nbar.has_value() != opt.sbar.has_value()) throw DomainError("--nbar and --sbar go together");
    const Scenario sc = load_scenario(opt.scenario);
    const std::size_t N = sc.plant.bank_count();
    const std::size_t n = sc.plant.state_dim();
    const double gamma = sc.estimator.gamma;
    out << std::setprecision(8);
    out << "agents N = " << N << ", state dimension n = " << n << ", gamma = " << gamma << "\n";

    std::optional<double> lambda2;
    if (N >= 2 && is_connected(sc.topology)) {
      lambda2 = algebraic_connectivity(laplacian(sc.topology));
      out << "lambda_2 = " << *lambda2 << "\n";
      out << "median bound 2 sqrt(N)/(gamma lambda_2) = " << theorem1_bound(N, gamma, *lambda2) << "\n";
    } else {
      out << "graph is not connected (or has a single node): lambda_2 bounds do not apply\n";
    }

    const bool lyapunov = sc.estimator.variant == EstimatorVariant::Lyapunov;
    std::optional<double> weight_norm;
    if (lyapunov) {
      const SharedBasis basis = sc.basis ? check_shared_basis(sc.plant, *sc.basis, sc.sim.tolerances)
                                         : construct_shared_basis(sc.plant, sc.sim.tolerances);
      const LyapunovWeights w = make_lyapunov_weights(sc.plant.A, basis, sc.estimator.P);
      weight_norm = w.weight_norm;
      out << "||V sqrt(P_bar)^-1|| = " << w.weight_norm << "\n";
      if (const double c = indicator_coupling(w, basis); c > 1e-9)
        out << "warning: sqrt(V^T P V) couples directions with different indicator patterns (relative size " << c
            << "); the global error bound assumes it does not\n";
      if (lambda2) {
        out << "global error bound (N n^2 + sqrt(n)) sqrt(N)/(gamma lambda_2) ||V sqrt(P_bar)^-1|| = " << theorem3_bound(N, n, gamma, *lambda2, w) << "\n";
        out << "disagreement bound sqrt(N n)/(gamma lambda_2) = " << disagreement_bound(N, n, gamma, *lambda2)
            << "\n";
      }
    } else {
      out << "the global error bound does not apply: the estimator uses the general variant\n";
    }

    if (opt.sbar) {
      if (!lyapunov) {
        err << "plug-and-play gains come from the global error bound, which needs the lyapunov variant "
               "with a certificate P; this scenario uses the general variant\n";
        return kInputError;
      }
      const GainPair g = plug_and_play_params(*opt.nbar, n, *opt.sbar, *weight_norm);
      out << "plug-and-play for N_bar = " << *opt.nbar << ", s_bar = " << *opt.sbar << ":\n"
          << "  gamma = " << g.gamma << "\n  kappa = " << std::setprecision(17) << g.kappa << "\n"
          << "  kappa * gamma = " << g.kappa * g.gamma << std::setprecision(8) << "\n";
      for (std::size_t m = 2; m <= *opt.nbar; ++m) {
        const double worst = 4.0 / static_cast<double>(m * m - m);
        out << "  N = " << m << ": worst-case lambda_2 = " << worst
            << ", global error bound = " << theorem3_bound(m, n, g.gamma, worst, *weight_norm) << "\n";
      }
    }
    return kOk;
  });
}

int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Scenario base = load_scenario(opt.scenario);
    if (opt.force) base.sim.override_audit = true;
    const std::vector<double> kappas = opt.kappas.empty() ? std::vector<double>{base.estimator.kappa} : opt.kappas;
    std::vector<double> gammas = opt.gammas.empty() ? std::vector<double>{base.estimator.gamma} : opt.gammas;
    std::sort(gammas.begin(), gammas.end());

    const AuditReport audit = audit_assumptions(base);
    if (!audit.all_pass() && !base.sim.override_audit) {
      out << audit.to_text();
      throw AuditFailure("scenario fails its assumption audit");
    }

    struct Cell {
      double kappa = 0.0, gamma = 0.0;
      std::string status = "ok";
      WindowMetrics tail;
      std::optional<double> theorem3;
    };
    std::vector<Cell> cells;
    for (double k : kappas)
      for (double g : gammas) cells.push_back({k, g, "ok", {}, std::nullopt});

    const fs::path dir = resolve_out_dir(opt.out_dir);
    const std::string stem = opt.scenario.stem().string();
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    auto worker = [&] {
      for (std::size_t c = next++; c < cells.size(); c = next++) {
        Cell& cell = cells[c];
        Scenario sc = base;
        sc.estimator.kappa = cell.kappa;
        sc.estimator.gamma = cell.gamma;
        try {
          const TrajectoryLog log = run_scenario(sc);
          cell.tail = tail_metrics(log, sc.sim.tail_fraction);
          cell.theorem3 = log.theorem3;
          if (opt.write_logs) {
            auto f = open_output(dir / (stem + "_k" + tag(cell.kappa) + "_g" + tag(cell.gamma) + ".csv"));
            write_log_csv(log, f);
          }
        } catch (const NumericalBlowup&) {
          cell.status = "blowup";
        } catch (const std::exception& e) {
          cell.status = "error";
          std::lock_guard lock(err_mutex);
          err << "kappa " << cell.kappa << ", gamma " << cell.gamma << ": " << e.what() << "\n";
        }
      }
    };
    std::size_t jobs = opt.jobs ? opt.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, cells.size());
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    const fs::path summary = dir / (stem + "_sweep.csv");
    {
      auto f = open_output(summary);
      f << "kappa,gamma,status,tail_inf_error,tail_euclid_error,sup_W,theorem3_bound\n" << std::setprecision(12);
      for (const Cell& c : cells) {
        f << c.kappa << "," << c.gamma << "," << c.status << ",";
        if (c.status == "ok")
          f << c.tail.max_inf_error << "," << c.tail.max_euclid_error << "," << c.tail.sup_W << ",";
        else
          f << ",,,";
        if (c.theorem3) f << *c.theorem3;
        f << "\n";
      }
    }

    out << std::setprecision(6);
    out << std::setw(10) << "kappa" << std::setw(10) << "gamma" << std::setw(9) << "status" << std::setw(16)
        << "tail inf err" << "\n";
    for (const Cell& c : cells) {
      out << std::setw(10) << c.kappa << std::setw(10) << c.gamma << std::setw(9) << c.status;
      if (c.status == "ok") out << std::setw(16) << c.tail.max_inf_error;
      out << "\n";
    }
    if (opt.eta) {
      out << "frontier for eta = " << *opt.eta << " (smallest gamma per kappa):\n";
      for (double k : kappas) {
        const auto hit = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) {
          return c.kappa == k && c.status == "ok" && c.tail.max_inf_error <= *opt.eta;
        });
        out << "  kappa " << k << ": ";
        if (hit == cells.end())
          out << "not reached on this grid\n";
        else
          out << "gamma " << hit->gamma << " (tail error " << hit->tail.max_inf_error << ")\n";
      }
    }
    out << "summary: " << summary.string() << "\n";
    return kOk;
  });
}

}  // namespace resest::cli
