// Scenario-driven co-simulation of the plant, the partial observers and the
// resilient estimator network, with attack generators, join/leave events,
// assumption audits and diagnostics in consensus/disagreement coordinates.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "resest/estimator.hpp"
#include "resest/graph.hpp"
#include "resest/observability.hpp"

namespace resest {

enum class SignalKind { None, ConstantBias, Sinusoid, Ramp, Table };

/// Sensor attack on one bank. `value` is the bias, amplitude or slope; a
/// single entry is broadcast to all m_i channels. For Table, `table_times`
/// are breakpoints and row k of `table_values` is the value there (linear
/// interpolation, held constant outside the range).
struct AttackSignal {
  SignalKind kind = SignalKind::None;
  Vector value;
  double freq = 0.0;  ///< rad per time unit
  double t_start = 0.0;
  std::vector<double> table_times;
  Matrix table_values;

  friend bool operator==(const AttackSignal& a, const AttackSignal& b);
};

struct AttackProfile {
  std::vector<AttackSignal> banks;  ///< one per bank; missing entries mean no attack
  std::size_t q = 0;                ///< attack budget

  std::vector<std::size_t> attacked_banks() const;
  friend bool operator==(const AttackProfile& a, const AttackProfile& b) = default;
};

/// a_i(t) in R^{m_i}.
Vector attack_signal(const AttackProfile& profile, std::size_t i, double t, std::size_t m_i);

/// Plant input u(t). Sinusoid: value * sin(freq t). Ramp: value * t.
struct InputSignal {
  SignalKind kind = SignalKind::None;
  Vector value;
  double freq = 0.0;
  std::vector<double> table_times;
  Matrix table_values;

  friend bool operator==(const InputSignal& a, const InputSignal& b);
};

Vector input_signal(const InputSignal& input, double t, std::size_t p);

/// Initial value policy for one family of states.
struct InitSpec {
  enum class Mode { Zero, Explicit, Random };
  Mode mode = Mode::Zero;
  /// Explicit values: one vector (broadcast to every agent) or one per agent.
  std::vector<Vector> values;

  friend bool operator==(const InitSpec& a, const InitSpec& b);
};

struct InitialState {
  InitSpec x;
  InitSpec z;
  InitSpec xhat;
  double box = 1.0;  ///< random entries are uniform in [-box, box]
  std::uint64_t seed = 0;

  friend bool operator==(const InitialState& a, const InitialState& b) = default;
};

struct Event {
  enum class Action { Join, Leave };
  double t = 0.0;
  Action action = Action::Leave;
  std::size_t agent = 0;  ///< 0-based

  friend bool operator==(const Event& a, const Event& b) = default;
};

struct SimSettings {
  double horizon = 10.0;
  double dt = 1e-3;
  std::size_t decimation = 1;
  double record_from = 0.0;  ///< samples before this time are not logged (t = 0 always is)
  double tail_fraction = 0.2;
  double noise_std = 0.0;  ///< white measurement noise, sampled once per step
  bool override_audit = false;
  double blowup_threshold = 1e12;
  ObservabilityTolerances tolerances;

  friend bool operator==(const SimSettings& a, const SimSettings& b) {
    return a.horizon == b.horizon && a.dt == b.dt && a.decimation == b.decimation && a.record_from == b.record_from &&
           a.tail_fraction == b.tail_fraction && a.noise_std == b.noise_std &&
           a.override_audit == b.override_audit && a.blowup_threshold == b.blowup_threshold &&
           a.tolerances.rank_tol == b.tolerances.rank_tol &&
           a.tolerances.membership_tol == b.tolerances.membership_tol;
  }
};

struct Scenario {
  std::string name;
  PlantModel plant;
  std::optional<Matrix> basis;  ///< user-supplied V; constructed when absent
  Topology topology;
  EstimatorConfig estimator;
  double pole_target = -1.0;
  double hurwitz_margin = 0.1;
  AttackProfile attacks;
  InputSignal input;
  InitialState initial;
  SimSettings sim;
  std::vector<Event> events;
  std::vector<std::pair<double, double>> windows;  ///< extra metric windows [t0, t1]

  /// Shape and range checks that need no linear algebra. Throws ScenarioError.
  void validate() const;
  friend bool operator==(const Scenario& a, const Scenario& b);
};

/// Result of checking the four standing assumptions plus the indicator counts.
struct AuditReport {
  struct Entry {
    std::string name;
    bool pass = false;
    std::string evidence;
  };
  std::vector<Entry> entries;  ///< assumptions 1..4 in order
  std::size_t q = 0;
  std::vector<std::size_t> attacked;
  std::optional<std::vector<std::size_t>> unobservable_subset;
  std::optional<double> lambda2;
  std::optional<SharedBasis> basis;
  std::vector<std::size_t> column_counts;
  bool indicator_redundancy = false;

  bool all_pass() const;
  std::string to_text() const;
};

AuditReport audit_assumptions(const Scenario& scenario);

/// Audit for the agents marked active (topology and redundancy only).
struct EventAudit {
  double t = 0.0;
  Event::Action action = Event::Action::Leave;
  std::size_t agent = 0;
  bool connected = false;
  bool redundant = false;
  double lambda2 = 0.0;
  bool pass() const { return connected && redundant; }
};

struct LogSample {
  double t = 0.0;
  Vector x;
  std::vector<Vector> z;
  std::vector<Vector> xhat;
  Vector residual;          ///< per agent
  std::vector<bool> active;
  Vector xbar_avg;          ///< mean of error coordinates over active agents
  Vector xtilde;            ///< (R^T (x) I_n) col(xbar_i), active agents only
  double W = 0.0;           ///< ||xtilde||
  double V = 0.0;           ///< ||xbar_avg||
};

struct TrajectoryLog {
  std::string scenario_name;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::vector<std::size_t> observable_dims;
  EstimatorVariant variant = EstimatorVariant::General;
  double gamma = 0.0;
  double horizon = 0.0;
  double dt = 0.0;
  bool assumption_violating = false;
  AuditReport audit;
  std::vector<EventAudit> event_audits;
  SharedBasis basis;
  /// Row map used for the error coordinates: W or sqrt(P_bar) W.
  Matrix error_rows;
  std::vector<Matrix> W_obs;  ///< per agent, for residuals
  std::vector<LogSample> samples;

  /// lambda_2 and agent count of the active graph at the end of the run.
  double final_lambda2 = 0.0;
  std::size_t final_agents = 0;
  std::optional<double> theorem3;       ///< Lyapunov runs only
  std::optional<double> w_bound;        ///< Lyapunov runs only
  std::optional<double> weight_norm;    ///< || V sqrt(P_bar)^-1 ||, Lyapunov runs only
  std::optional<double> weight_coupling;  ///< indicator_coupling(), Lyapunov runs only
};

/// Runs the scenario. Throws AuditFailure (unless overridden), NumericalBlowup.
TrajectoryLog run_scenario(const Scenario& scenario);

struct WindowMetrics {
  double t_from = 0.0;
  double t_to = 0.0;
  double max_inf_error = 0.0;          ///< max_i sup_t ||xhat_i - x||_inf
  double max_euclid_error = 0.0;       ///< max_i sup_t ||xhat_i - x||
  double sup_W = 0.0;
  double sup_V = 0.0;
  std::vector<double> residual_sup;    ///< per agent
  std::vector<double> agent_inf_error; ///< per agent sup ||xhat_i - x||_inf
  std::optional<double> theorem3;
  std::optional<double> w_bound;
};

/// Metrics over samples with t in [t0, t1] (active agents only).
WindowMetrics window_metrics(const TrajectoryLog& log, double t0, double t1);

/// Metrics over the last `window_fraction` of the logged time span.
WindowMetrics tail_metrics(const TrajectoryLog& log, double window_fraction);

/// Three-inertia torsional plant: three rotors with inertia J, viscous
/// friction b and shaft stiffness k, torque input on rotor 1, and the five
/// single-sensor banks theta1, theta2, theta3, theta1-theta2, theta2-theta3.
PlantModel three_inertia_plant(double J = 0.01, double b = 0.007, double k = 1.37);

}  // namespace resest
