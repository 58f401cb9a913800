#include "resest/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "resest/errors.hpp"
#include "resest/integrate.hpp"

namespace resest {

namespace {

Vector broadcast(const Vector& value, std::size_t dim, const char* what) {
  const auto d = static_cast<Eigen::Index>(dim);
  if (value.size() == 1) return Vector::Constant(d, value(0));
  if (value.size() == d) return value;
  std::ostringstream msg;
  msg << what << ": value has " << value.size() << " entries, expected 1 or " << dim;
  throw DimensionError(msg.str());
}

Vector table_lookup(const std::vector<double>& times, const Matrix& values, double t, std::size_t dim) {
  if (times.empty()) return Vector::Zero(static_cast<Eigen::Index>(dim));
  auto row = [&](std::size_t k) -> Vector { return broadcast(values.row(static_cast<Eigen::Index>(k)).transpose(), dim, "table"); };
  if (t <= times.front()) return row(0);
  if (t >= times.back()) return row(times.size() - 1);
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto hi = static_cast<std::size_t>(it - times.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - times[lo]) / (times[hi] - times[lo]);
  return (1.0 - w) * row(lo) + w * row(hi);
}

void evaluate_into(SignalKind kind, const Vector& value, double freq, double t_start,
                   const std::vector<double>& table_times, const Matrix& table_values, double t,
                   std::size_t dim, Vector& out) {
  const auto d = static_cast<Eigen::Index>(dim);
  out.resize(d);
  if (kind == SignalKind::Table) {
    out = table_lookup(table_times, table_values, t, dim);
    return;
  }
  if (kind == SignalKind::None || t < t_start) {
    out.setZero();
    return;
  }
  double scale = 1.0;
  const char* what = "constant_bias";
  if (kind == SignalKind::Sinusoid) {
    scale = std::sin(freq * (t - t_start));
    what = "sinusoid";
  } else if (kind == SignalKind::Ramp) {
    scale = t - t_start;
    what = "ramp";
  }
  if (value.size() == 1) {
    out.setConstant(value(0) * scale);
  } else if (value.size() == d) {
    out = value * scale;
  } else {
    broadcast(value, dim, what);  // throws with the shape message
  }
}

bool same_table(const std::vector<double>& ta, const Matrix& va, const std::vector<double>& tb,
                const Matrix& vb) {
  return ta == tb && identical(va, vb);
}

std::string bank_list(const std::vector<std::size_t>& banks) {
  std::ostringstream s;
  s << "{";
  for (std::size_t k = 0; k < banks.size(); ++k) s << (k ? "," : "") << banks[k] + 1;
  s << "}";
  return s.str();
}

std::vector<Vector> expand_init(const InitSpec& spec, const std::vector<std::size_t>& dims,
                                double box, std::mt19937_64& rng, const char* what) {
  std::vector<Vector> out;
  std::uniform_real_distribution<double> uni(-box, box);
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const auto d = static_cast<Eigen::Index>(dims[i]);
    switch (spec.mode) {
      case InitSpec::Mode::Zero:
        out.push_back(Vector::Zero(d));
        break;
      case InitSpec::Mode::Random: {
        Vector v(d);
        for (Eigen::Index k = 0; k < d; ++k) v(k) = uni(rng);
        out.push_back(std::move(v));
        break;
      }
      case InitSpec::Mode::Explicit: {
        const Vector& v = spec.values.size() == 1 ? spec.values[0] : spec.values.at(i);
        if (v.size() != d) {
          std::ostringstream msg;
          msg << "initial " << what << " for agent " << i + 1 << " has " << v.size()
              << " entries, expected " << d;
          throw ScenarioError(msg.str());
        }
        out.push_back(v);
        break;
      }
    }
  }
  return out;
}

}  // namespace

bool operator==(const AttackSignal& a, const AttackSignal& b) {
  return a.kind == b.kind && identical(a.value, b.value) && a.freq == b.freq &&
         a.t_start == b.t_start && same_table(a.table_times, a.table_values, b.table_times, b.table_values);
}

bool operator==(const InputSignal& a, const InputSignal& b) {
  return a.kind == b.kind && identical(a.value, b.value) && a.freq == b.freq &&
         same_table(a.table_times, a.table_values, b.table_times, b.table_values);
}

bool operator==(const InitSpec& a, const InitSpec& b) {
  if (a.mode != b.mode || a.values.size() != b.values.size()) return false;
  for (std::size_t k = 0; k < a.values.size(); ++k)
    if (!identical(a.values[k], b.values[k])) return false;
  return true;
}

bool operator==(const Scenario& a, const Scenario& b) {
  const bool basis_eq = a.basis.has_value() == b.basis.has_value() &&
                        (!a.basis || identical(*a.basis, *b.basis));
  return a.name == b.name && a.plant == b.plant && basis_eq && a.topology == b.topology &&
         a.estimator == b.estimator && a.pole_target == b.pole_target &&
         a.hurwitz_margin == b.hurwitz_margin && a.attacks == b.attacks && a.input == b.input &&
         a.initial == b.initial && a.sim == b.sim && a.events == b.events && a.windows == b.windows;
}

std::vector<std::size_t> AttackProfile::attacked_banks() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < banks.size(); ++i)
    if (banks[i].kind != SignalKind::None) out.push_back(i);
  return out;
}

namespace {

void attack_signal_into(const AttackProfile& profile, std::size_t i, double t, std::size_t m_i, Vector& out) {
  if (i >= profile.banks.size()) {
    out.setZero(static_cast<Eigen::Index>(m_i));
    return;
  }
  const AttackSignal& a = profile.banks[i];
  evaluate_into(a.kind, a.value, a.freq, a.t_start, a.table_times, a.table_values, t, m_i, out);
}

void input_signal_into(const InputSignal& input, double t, std::size_t p, Vector& out) {
  evaluate_into(input.kind, input.value, input.freq, 0.0, input.table_times, input.table_values, t, p, out);
}

}  // namespace

Vector attack_signal(const AttackProfile& profile, std::size_t i, double t, std::size_t m_i) {
  Vector out;
  attack_signal_into(profile, i, t, m_i, out);
  return out;
}

Vector input_signal(const InputSignal& input, double t, std::size_t p) {
  Vector out;
  input_signal_into(input, t, p, out);
  return out;
}

void Scenario::validate() const {
  auto fail = [](const std::string& what) { throw ScenarioError(what); };
  try {
    plant.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  const std::size_t N = plant.bank_count();
  const auto n = static_cast<Eigen::Index>(plant.state_dim());
  if (topology.node_count() != N) fail("topology node count must equal the number of sensor banks");
  if (basis && (basis->rows() != n || basis->cols() != n)) fail("basis must be n x n");
  if (!(estimator.kappa > 0.0) || !(estimator.gamma > 0.0)) fail("kappa and gamma must be positive");
  if (estimator.variant == EstimatorVariant::Lyapunov && (estimator.P.rows() != n || estimator.P.cols() != n))
    fail("the lyapunov variant needs an n x n matrix P");
  if (!(pole_target < 0.0)) fail("observer pole target must be negative");
  if (!(hurwitz_margin >= 0.0)) fail("hurwitz margin must be nonnegative");
  if (attacks.banks.size() > N) fail("more attack entries than sensor banks");
  for (const AttackSignal& a : attacks.banks) {
    if (a.kind == SignalKind::Table && (a.table_times.empty() || a.table_values.rows() != static_cast<Eigen::Index>(a.table_times.size())))
      fail("attack table needs one value row per breakpoint");
    if (!std::is_sorted(a.table_times.begin(), a.table_times.end())) fail("attack table times must increase");
  }
  if (input.kind == SignalKind::Table &&
      (input.table_times.empty() || input.table_values.rows() != static_cast<Eigen::Index>(input.table_times.size())))
    fail("input table needs one value row per breakpoint");
  if (!(sim.dt > 0.0)) fail("dt must be positive");
  if (!(sim.horizon > 0.0)) fail("horizon must be positive");
  if (sim.decimation == 0) fail("decimation must be at least 1");
  if (!(sim.record_from >= 0.0)) fail("record_from must be nonnegative");
  if (!(sim.tail_fraction > 0.0 && sim.tail_fraction <= 1.0)) fail("tail fraction must lie in (0, 1]");
  if (!(sim.noise_std >= 0.0)) fail("noise standard deviation must be nonnegative");
  if (!(initial.box >= 0.0)) fail("initial-condition box must be nonnegative");
  for (std::size_t k = 0; k < events.size(); ++k) {
    if (events[k].agent >= N) fail("event refers to an unknown agent");
    if (events[k].t < 0.0 || events[k].t > sim.horizon) fail("event time outside [0, horizon]");
    if (k > 0 && !(events[k].t > events[k - 1].t)) fail("event times must be strictly increasing");
  }
  for (const auto& [t0, t1] : windows)
    if (!(t0 < t1)) fail("metric windows need t0 < t1");
}

bool AuditReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const Entry& e) { return e.pass; });
}

std::string AuditReport::to_text() const {
  std::ostringstream out;
  for (std::size_t k = 0; k < entries.size(); ++k)
    out << (entries[k].pass ? "PASS" : "FAIL") << "  " << entries[k].name << ": " << entries[k].evidence << "\n";
  if (basis) {
    out << "Indicator table s_i^l (rows: banks, columns: basis directions):\n";
    for (Eigen::Index i = 0; i < basis->indicators.rows(); ++i) {
      out << "  bank " << i + 1 << ":";
      for (Eigen::Index l = 0; l < basis->indicators.cols(); ++l) out << " " << basis->indicators(i, l);
      out << "\n";
    }
    out << "Column counts vs 2q+1 = " << 2 * q + 1 << ":";
    for (std::size_t c : column_counts) out << " " << c;
    out << (indicator_redundancy ? "  OK" : "  SHORT") << "\n";
  }
  return out.str();
}

AuditReport audit_assumptions(const Scenario& scenario) {
  scenario.validate();
  const PlantModel& plant = scenario.plant;
  const std::size_t N = plant.bank_count();
  const std::size_t q = scenario.attacks.q;
  AuditReport r;
  r.q = q;

  r.attacked = scenario.attacks.attacked_banks();
  {
    std::ostringstream ev;
    ev << r.attacked.size() << " attacked bank(s) " << bank_list(r.attacked) << ", budget q = " << q;
    r.entries.push_back({"at most q attacked banks", r.attacked.size() <= q, ev.str()});
  }

  {
    std::ostringstream ev;
    bool pass = false;
    if (2 * q >= N) {
      ev << "needs 2q < N, got q = " << q << ", N = " << N;
    } else {
      try {
        r.unobservable_subset = find_unobservable_subset(plant, q, scenario.sim.tolerances.rank_tol);
        pass = !r.unobservable_subset.has_value();
        if (pass)
          ev << "observable from every " << N - 2 * q << " of " << N << " banks";
        else
          ev << "banks " << bank_list(*r.unobservable_subset) << " do not observe the state";
      } catch (const CombinatorialLimit& e) {
        ev << e.what();
      }
    }
    r.entries.push_back({"2q-redundant observability", pass, ev.str()});
  }

  {
    std::ostringstream ev;
    const bool connected = is_connected(scenario.topology);
    if (N >= 2) r.lambda2 = algebraic_connectivity(laplacian(scenario.topology));
    ev << (connected ? "connected" : "disconnected");
    if (r.lambda2) ev << ", lambda_2 = " << *r.lambda2;
    r.entries.push_back({"undirected connected graph", connected, ev.str()});
  }

  {
    std::ostringstream ev;
    bool pass = false;
    try {
      r.basis = scenario.basis ? check_shared_basis(plant, *scenario.basis, scenario.sim.tolerances)
                               : construct_shared_basis(plant, scenario.sim.tolerances);
      pass = true;
      ev << (scenario.basis ? "supplied" : "constructed") << " basis validated";
    } catch (const BasisMismatch& e) {
      ev << e.what();
    } catch (const NoSharedBasisFound& e) {
      ev << e.what();
    } catch (const SingularBasis& e) {
      ev << e.what();
    }
    r.entries.push_back({"shared basis for unobservable subspaces", pass, ev.str()});
  }

  if (r.basis) {
    r.column_counts = r.basis->column_counts();
    r.indicator_redundancy = verify_indicator_redundancy(*r.basis, q);
  }
  return r;
}

PlantModel three_inertia_plant(double J, double b, double k) {
  PlantModel p;
  p.A = Matrix::Zero(6, 6);
  p.A(0, 1) = 1.0;
  p.A(1, 0) = -k / J;
  p.A(1, 1) = -b / J;
  p.A(1, 2) = k / J;
  p.A(2, 3) = 1.0;
  p.A(3, 0) = k / J;
  p.A(3, 2) = -(k + k) / J;
  p.A(3, 3) = -b / J;
  p.A(3, 4) = k / J;
  p.A(4, 5) = 1.0;
  p.A(5, 2) = k / J;
  p.A(5, 4) = -k / J;
  p.A(5, 5) = -b / J;
  p.B = Matrix::Zero(6, 1);
  p.B(1, 0) = 1.0 / J;
  const double rows[5][6] = {{1, 0, 0, 0, 0, 0},
                             {0, 0, 1, 0, 0, 0},
                             {0, 0, 0, 0, 1, 0},
                             {1, 0, -1, 0, 0, 0},
                             {0, 0, 1, 0, -1, 0}};
  for (const auto& r : rows) {
    Matrix C(1, 6);
    for (int c = 0; c < 6; ++c) C(0, c) = r[c];
    p.C_blocks.push_back(C);
  }
  return p;
}

namespace {

class Simulation {
 public:
  Simulation(const Scenario& scenario, TrajectoryLog& log)
      : sc_(scenario), log_(log), rng_(scenario.initial.seed) {}

  void run();

 private:
  void build();
  void apply_events(std::size_t step);
  void refresh_neighbors();
  void rhs(double t, const Vector& s, Vector& out);
  void record(double t, const Vector& s);
  const Matrix& complement(std::size_t count);

  const Scenario& sc_;
  TrajectoryLog& log_;
  std::mt19937_64 rng_;
  std::optional<EstimatorModel> model_;

  std::size_t n_ = 0, N_ = 0, p_ = 0;
  std::vector<Eigen::Index> z_off_, xhat_off_, o_;
  std::vector<bool> active_;
  std::vector<std::vector<std::size_t>> links_;
  std::vector<Vector> noise_;
  std::vector<std::size_t> event_steps_;
  std::size_t next_event_ = 0;
  std::map<std::size_t, Matrix> complements_;
  Vector state_;
  // scratch
  Vector u_, coupling_, y_, a_;
};

void Simulation::build() {
  const PlantModel& plant = sc_.plant;
  n_ = plant.state_dim();
  N_ = plant.bank_count();
  p_ = plant.input_dim();

  log_.audit = audit_assumptions(sc_);
  log_.assumption_violating = !log_.audit.all_pass();
  if (log_.assumption_violating && !sc_.sim.override_audit)
    throw AuditFailure("scenario '" + sc_.name + "' fails its assumption audit:\n" + log_.audit.to_text());
  if (!log_.audit.basis)
    throw AuditFailure("scenario '" + sc_.name + "': no valid shared basis, observers cannot be built");

  ObserverBank bank = build_observer_bank(plant, *log_.audit.basis, sc_.pole_target, sc_.hurwitz_margin);
  model_.emplace(plant, *log_.audit.basis, std::move(bank), sc_.estimator);

  log_.scenario_name = sc_.name;
  log_.seed = sc_.initial.seed;
  log_.n = n_;
  log_.variant = sc_.estimator.variant;
  log_.gamma = sc_.estimator.gamma;
  log_.horizon = sc_.sim.horizon;
  log_.dt = sc_.sim.dt;
  log_.basis = model_->basis();
  log_.error_rows = model_->comparison_rows();
  if (model_->lyapunov()) {
    log_.weight_norm = model_->lyapunov()->weight_norm;
    log_.weight_coupling = indicator_coupling(*model_->lyapunov(), model_->basis());
  }

  Eigen::Index off = static_cast<Eigen::Index>(n_);
  for (std::size_t i = 0; i < N_; ++i) {
    o_.push_back(static_cast<Eigen::Index>(model_->observable_dim(i)));
    log_.observable_dims.push_back(model_->observable_dim(i));
    log_.W_obs.push_back(model_->bank().agents[i].decomposition.W_obs);
    z_off_.push_back(off);
    off += o_.back();
    xhat_off_.push_back(off);
    off += static_cast<Eigen::Index>(n_);
  }
  state_.resize(off);

  // Draw order: x, then every z_i, then every xhat_i.
  const double box = sc_.initial.box;
  state_.head(static_cast<Eigen::Index>(n_)) = expand_init(sc_.initial.x, {n_}, box, rng_, "x")[0];
  std::vector<std::size_t> odims(N_), ndims(N_, n_);
  for (std::size_t i = 0; i < N_; ++i) odims[i] = static_cast<std::size_t>(o_[i]);
  const auto z0 = expand_init(sc_.initial.z, odims, box, rng_, "z");
  const auto xh0 = expand_init(sc_.initial.xhat, ndims, box, rng_, "xhat");
  for (std::size_t i = 0; i < N_; ++i) {
    state_.segment(z_off_[i], o_[i]) = z0[i];
    state_.segment(xhat_off_[i], static_cast<Eigen::Index>(n_)) = xh0[i];
  }

  active_.assign(N_, true);
  refresh_neighbors();
  noise_.clear();
  for (std::size_t i = 0; i < N_; ++i) noise_.push_back(Vector::Zero(static_cast<Eigen::Index>(plant.output_dim(i))));
  for (const Event& e : sc_.events) event_steps_.push_back(static_cast<std::size_t>(std::llround(e.t / sc_.sim.dt)));

  u_.resize(static_cast<Eigen::Index>(p_));
  coupling_.resize(static_cast<Eigen::Index>(n_));
}

void Simulation::refresh_neighbors() {
  links_.assign(N_, {});
  for (std::size_t i = 0; i < N_; ++i) {
    if (!active_[i]) continue;
    for (std::size_t j : sc_.topology.neighbors(i))
      if (active_[j]) links_[i].push_back(j);
  }
}

void Simulation::apply_events(std::size_t step) {
  bool changed = false;
  while (next_event_ < sc_.events.size() && event_steps_[next_event_] == step) {
    const Event& e = sc_.events[next_event_++];
    active_[e.agent] = e.action == Event::Action::Join;
    changed = true;

    EventAudit audit;
    audit.t = static_cast<double>(step) * sc_.sim.dt;
    audit.action = e.action;
    audit.agent = e.agent;
    const Topology sub = sc_.topology.induced(active_);
    audit.connected = is_connected(sub);
    if (sub.node_count() >= 2) audit.lambda2 = algebraic_connectivity(laplacian(sub));
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < N_; ++i)
      if (active_[i]) keep.push_back(i);
    PlantModel remaining{sc_.plant.A, sc_.plant.B, {}};
    for (std::size_t i : keep) remaining.C_blocks.push_back(sc_.plant.C_blocks[i]);
    const std::size_t q = sc_.attacks.q;
    try {
      audit.redundant = !remaining.C_blocks.empty() && 2 * q < keep.size() &&
                        check_redundant_observability(remaining, q, sc_.sim.tolerances.rank_tol);
    } catch (const CombinatorialLimit&) {
      audit.redundant = false;
    }
    log_.event_audits.push_back(audit);
    if (!audit.pass()) {
      log_.assumption_violating = true;
      if (!sc_.sim.override_audit) {
        std::ostringstream msg;
        msg << "assumptions fail after " << (e.action == Event::Action::Join ? "join" : "leave")
            << " of agent " << e.agent + 1 << " at t = " << audit.t
            << (audit.connected ? "" : ": graph disconnected")
            << (audit.redundant ? "" : ": redundant observability lost");
        throw AuditFailure(msg.str());
      }
    }
  }
  if (changed) refresh_neighbors();
}

void Simulation::rhs(double t, const Vector& s, Vector& out) {
  const PlantModel& plant = sc_.plant;
  const auto n = static_cast<Eigen::Index>(n_);
  if (out.size() != s.size()) out.resize(s.size());
  input_signal_into(sc_.input, t, p_, u_);
  const auto x = s.head(n);
  out.head(n).noalias() = plant.A.lazyProduct(x);
  if (p_ > 0) out.head(n).noalias() += plant.B.lazyProduct(u_);

  for (std::size_t i = 0; i < N_; ++i) {
    auto zdot = out.segment(z_off_[i], o_[i]);
    auto xdot = out.segment(xhat_off_[i], n);
    if (!active_[i]) {
      zdot.setZero();
      xdot.setZero();
      continue;
    }
    const auto z = s.segment(z_off_[i], o_[i]);
    const auto xhat = s.segment(xhat_off_[i], n);
    if (o_[i] > 0) {
      // partial_observer_rhs without temporaries. The matrices are tiny, so
      // coefficient-wise products beat the blocked matrix-vector kernel.
      const AgentObserver& ob = model_->bank().agents[i];
      y_.noalias() = plant.C_blocks[i].lazyProduct(x);
      attack_signal_into(sc_.attacks, i, t, plant.output_dim(i), a_);
      y_ += a_;
      if (sc_.sim.noise_std > 0.0) y_ += noise_[i];
      y_.noalias() -= ob.CV.lazyProduct(z);
      zdot.noalias() = ob.WAV.lazyProduct(z);
      if (ob.WB.cols() > 0) zdot.noalias() += ob.WB.lazyProduct(u_);
      zdot.noalias() += ob.L.lazyProduct(y_);
    }
    coupling_.setZero();
    for (std::size_t j : links_[i]) coupling_ += s.segment(xhat_off_[j], n) - xhat;
    model_->resilient_rhs(i, xhat, coupling_, z, u_, xdot);
  }
}

const Matrix& Simulation::complement(std::size_t count) {
  auto it = complements_.find(count);
  if (it == complements_.end()) it = complements_.emplace(count, orthonormal_complement(count)).first;
  return it->second;
}

void Simulation::record(double t, const Vector& s) {
  const auto n = static_cast<Eigen::Index>(n_);
  LogSample smp;
  smp.t = t;
  smp.x = s.head(n);
  smp.active = active_;
  smp.residual = Vector::Zero(static_cast<Eigen::Index>(N_));
  std::vector<Vector> xbar;
  for (std::size_t i = 0; i < N_; ++i) {
    smp.z.push_back(s.segment(z_off_[i], o_[i]));
    smp.xhat.push_back(s.segment(xhat_off_[i], n));
    smp.residual(static_cast<Eigen::Index>(i)) =
        attack_residual(smp.z.back(), smp.xhat.back(), model_->bank().agents[i]);
    if (active_[i]) xbar.push_back(log_.error_rows * (smp.xhat.back() - smp.x));
  }
  const auto Na = xbar.size();
  smp.xbar_avg = Vector::Zero(n);
  for (const Vector& v : xbar) smp.xbar_avg += v;
  if (Na > 0) smp.xbar_avg /= static_cast<double>(Na);
  if (Na >= 2) {
    const Matrix& R = complement(Na);
    smp.xtilde = Vector::Zero(static_cast<Eigen::Index>(Na - 1) * n);
    for (std::size_t k = 0; k + 1 < Na; ++k)
      for (std::size_t a = 0; a < Na; ++a)
        smp.xtilde.segment(static_cast<Eigen::Index>(k) * n, n) +=
            R(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k)) * xbar[a];
  } else {
    smp.xtilde = Vector(0);
  }
  smp.W = smp.xtilde.norm();
  smp.V = smp.xbar_avg.norm();
  log_.samples.push_back(std::move(smp));
}

void Simulation::run() {
  build();
  const double dt = sc_.sim.dt;
  const auto steps = static_cast<std::size_t>(std::llround(sc_.sim.horizon / dt));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Rk4Workspace ws;
  auto f = [this](double t, const Vector& s, Vector& out) { rhs(t, s, out); };
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    apply_events(k);
    if ((k % sc_.sim.decimation == 0 && (k == 0 || t >= sc_.sim.record_from)) || k == steps) record(t, state_);
    if (k == steps) break;
    if (sc_.sim.noise_std > 0.0)
      for (Vector& v : noise_)
        for (Eigen::Index c = 0; c < v.size(); ++c) v(c) = sc_.sim.noise_std * gauss(rng_);
    rk4_step(state_, t, dt, f, ws);
    if (!(state_.cwiseAbs().maxCoeff() < sc_.sim.blowup_threshold)) {
      std::ostringstream msg;
      msg << "state norm exceeded " << sc_.sim.blowup_threshold << " in the step after t = " << t;
      throw NumericalBlowup(t, msg.str());
    }
  }

  const Topology sub = sc_.topology.induced(active_);
  log_.final_agents = sub.node_count();
  if (log_.final_agents >= 2 && is_connected(sub)) {
    log_.final_lambda2 = algebraic_connectivity(laplacian(sub));
    if (model_->lyapunov()) {
      log_.theorem3 = theorem3_bound(log_.final_agents, n_, sc_.estimator.gamma, log_.final_lambda2,
                                     *model_->lyapunov());
      log_.w_bound = disagreement_bound(log_.final_agents, n_, sc_.estimator.gamma, log_.final_lambda2);
    }
  }
}

}  // namespace

TrajectoryLog run_scenario(const Scenario& scenario) {
  scenario.validate();
  TrajectoryLog log;
  Simulation sim(scenario, log);
  sim.run();
  return log;
}

WindowMetrics window_metrics(const TrajectoryLog& log, double t0, double t1) {
  WindowMetrics m;
  m.t_from = t0;
  m.t_to = t1;
  const std::size_t N = log.observable_dims.size();
  m.residual_sup.assign(N, 0.0);
  m.agent_inf_error.assign(N, 0.0);
  const double slack = 1e-9 * std::max(1.0, log.dt);
  for (const LogSample& s : log.samples) {
    if (s.t < t0 - slack || s.t > t1 + slack) continue;
    for (std::size_t i = 0; i < N; ++i) {
      if (!s.active[i]) continue;
      const Vector e = s.xhat[i] - s.x;
      const double inf = e.size() ? e.cwiseAbs().maxCoeff() : 0.0;
      m.agent_inf_error[i] = std::max(m.agent_inf_error[i], inf);
      m.max_inf_error = std::max(m.max_inf_error, inf);
      m.max_euclid_error = std::max(m.max_euclid_error, e.norm());
      m.residual_sup[i] = std::max(m.residual_sup[i], s.residual(static_cast<Eigen::Index>(i)));
    }
    m.sup_W = std::max(m.sup_W, s.W);
    m.sup_V = std::max(m.sup_V, s.V);
  }
  m.theorem3 = log.theorem3;
  m.w_bound = log.w_bound;
  return m;
}

WindowMetrics tail_metrics(const TrajectoryLog& log, double window_fraction) {
  if (log.samples.empty()) throw DomainError("tail_metrics: empty log");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw DomainError("tail_metrics: window fraction must lie in (0, 1]");
  const double t_end = log.samples.back().t;
  const double t_begin = log.samples.front().t;
  return window_metrics(log, t_end - window_fraction * (t_end - t_begin), t_end);
}

}  // namespace resest
