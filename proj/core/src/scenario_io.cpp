#include "resest/scenario_io.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "resest/errors.hpp"

namespace resest {

namespace {

using json = nlohmann::json;

// Reading walks the document with the JSON pointer of the current value, so
// every schema complaint can say exactly where it came from.
class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw ScenarioError(source_ + ": " + (path.empty() ? "/" : path) + ": " + what);
  }

  void object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) const {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : j.items()) {
      (void)value;
      const bool known = std::any_of(allowed.begin(), allowed.end(),
                                     [&](const char* k) { return key == k; });
      if (!known) fail(path + "/" + key, "unknown key");
    }
  }

  const json& required(const json& j, const std::string& path, const char* key) const {
    if (!j.contains(key)) fail(path, std::string("missing required key '") + key + "'");
    return j.at(key);
  }

  double number(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
  }

  double number_or(const json& j, const std::string& path, const char* key, double fallback) const {
    return j.contains(key) ? number(j.at(key), path + "/" + key) : fallback;
  }

  std::uint64_t unsigned_integer(const json& j, const std::string& path) const {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
      fail(path, "expected a nonnegative integer");
    return j.get<std::uint64_t>();
  }

  bool boolean(const json& j, const std::string& path) const {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
  }

  std::string string(const json& j, const std::string& path) const {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
  }

  /// A number (length-1 vector) or a flat array of numbers.
  Vector vector(const json& j, const std::string& path) const {
    if (j.is_number()) return Vector::Constant(1, j.get<double>());
    if (!j.is_array()) fail(path, "expected a number or an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k)
      v(static_cast<Eigen::Index>(k)) = number(j[k], path + "/" + std::to_string(k));
    return v;
  }

  /// Nested row-major array. A flat array is read as a single row.
  Matrix matrix(const json& j, const std::string& path) const {
    if (!j.is_array()) fail(path, "expected a row-major array of rows");
    if (j.empty()) return Matrix(0, 0);
    if (!j[0].is_array()) return vector(j, path).transpose();
    const std::size_t cols = j[0].size();
    Matrix M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
      const std::string rp = path + "/" + std::to_string(r);
      if (!j[r].is_array()) fail(rp, "expected a row (array of numbers)");
      if (j[r].size() != cols) fail(rp, "rows have different lengths");
      for (std::size_t c = 0; c < cols; ++c)
        M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            number(j[r][c], rp + "/" + std::to_string(c));
    }
    return M;
  }

  Eigen::MatrixXi int_matrix(const json& j, const std::string& path) const {
    const Matrix M = matrix(j, path);
    Eigen::MatrixXi out(M.rows(), M.cols());
    for (Eigen::Index r = 0; r < M.rows(); ++r)
      for (Eigen::Index c = 0; c < M.cols(); ++c) {
        const double v = M(r, c);
        if (v != 0.0 && v != 1.0) fail(path, "adjacency entries must be 0 or 1");
        out(r, c) = static_cast<int>(v);
      }
    return out;
  }

 private:
  std::string source_;
};

SignalKind signal_kind(const Reader& rd, const json& j, const std::string& path) {
  const std::string s = rd.string(j, path);
  if (s == "none" || s == "zero") return SignalKind::None;
  if (s == "constant_bias" || s == "constant") return SignalKind::ConstantBias;
  if (s == "sinusoid") return SignalKind::Sinusoid;
  if (s == "ramp") return SignalKind::Ramp;
  if (s == "table") return SignalKind::Table;
  rd.fail(path, "unknown signal kind '" + s + "' (none, constant_bias, sinusoid, ramp, table)");
}

const char* kind_name(SignalKind k, bool input) {
  switch (k) {
    case SignalKind::None: return input ? "zero" : "none";
    case SignalKind::ConstantBias: return input ? "constant" : "constant_bias";
    case SignalKind::Sinusoid: return "sinusoid";
    case SignalKind::Ramp: return "ramp";
    case SignalKind::Table: return "table";
  }
  return "none";
}

PlantModel read_plant(const Reader& rd, const json& j, const std::string& path) {
  if (j.contains("preset")) {
    rd.object(j, path, {"preset", "J", "b", "k"});
    const std::string name = rd.string(j.at("preset"), path + "/preset");
    if (name != "three_inertia") rd.fail(path + "/preset", "unknown plant preset '" + name + "'");
    return three_inertia_plant(rd.number_or(j, path, "J", 0.01), rd.number_or(j, path, "b", 0.007),
                               rd.number_or(j, path, "k", 1.37));
  }
  rd.object(j, path, {"A", "B", "C"});
  PlantModel p;
  p.A = rd.matrix(rd.required(j, path, "A"), path + "/A");
  p.B = j.contains("B") ? rd.matrix(j.at("B"), path + "/B") : Matrix(p.A.rows(), 0);
  if (p.B.size() == 0) p.B.resize(p.A.rows(), 0);
  const json& C = rd.required(j, path, "C");
  if (!C.is_array() || C.empty()) rd.fail(path + "/C", "expected a nonempty list of output matrices");
  for (std::size_t i = 0; i < C.size(); ++i)
    p.C_blocks.push_back(rd.matrix(C[i], path + "/C/" + std::to_string(i)));
  try {
    p.validate();
  } catch (const Error& e) {
    rd.fail(path, e.what());
  }
  return p;
}

Topology read_topology(const Reader& rd, const json& j, const std::string& path, std::size_t banks) {
  rd.object(j, path, {"preset", "nodes", "adjacency"});
  try {
    if (j.contains("adjacency")) {
      if (j.contains("preset") || j.contains("nodes"))
        rd.fail(path, "give either 'adjacency' or 'preset' (with 'nodes'), not both");
      return Topology(rd.int_matrix(j.at("adjacency"), path + "/adjacency"));
    }
    const std::string name = rd.string(rd.required(j, path, "preset"), path + "/preset");
    const std::size_t nodes =
        j.contains("nodes") ? rd.unsigned_integer(j.at("nodes"), path + "/nodes") : banks;
    return Topology::preset(name, nodes);
  } catch (const ScenarioError&) {
    throw;
  } catch (const Error& e) {
    rd.fail(path, e.what());
  }
}

EstimatorConfig read_estimator(const Reader& rd, const json& j, const std::string& path) {
  rd.object(j, path, {"kappa", "gamma", "variant", "P"});
  EstimatorConfig c;
  c.kappa = rd.number_or(j, path, "kappa", c.kappa);
  c.gamma = rd.number_or(j, path, "gamma", c.gamma);
  if (j.contains("variant")) {
    const std::string v = rd.string(j.at("variant"), path + "/variant");
    if (v == "general")
      c.variant = EstimatorVariant::General;
    else if (v == "lyapunov")
      c.variant = EstimatorVariant::Lyapunov;
    else
      rd.fail(path + "/variant", "expected 'general' or 'lyapunov'");
  }
  if (j.contains("P")) c.P = rd.matrix(j.at("P"), path + "/P");
  return c;
}

void read_table(const Reader& rd, const json& j, const std::string& path,
                std::vector<double>& times, Matrix& values) {
  const json& jt = rd.required(j, path, "times");
  const Vector t = rd.vector(jt, path + "/times");
  times.assign(t.data(), t.data() + t.size());
  const json& jv = rd.required(j, path, "values");
  if (!jv.is_array()) rd.fail(path + "/values", "expected an array");
  // A flat list gives one scalar per breakpoint.
  values = (!jv.empty() && !jv[0].is_array()) ? Matrix(rd.vector(jv, path + "/values"))
                                              : rd.matrix(jv, path + "/values");
  if (values.rows() != static_cast<Eigen::Index>(times.size()))
    rd.fail(path, "table needs one value row per time");
}

AttackProfile read_attacks(const Reader& rd, const json& j, const std::string& path, std::size_t N) {
  rd.object(j, path, {"q", "banks"});
  AttackProfile a;
  a.q = j.contains("q") ? rd.unsigned_integer(j.at("q"), path + "/q") : 0;
  a.banks.assign(N, AttackSignal{});
  if (!j.contains("banks")) return a;
  const json& banks = j.at("banks");
  if (!banks.is_array()) rd.fail(path + "/banks", "expected an array");
  std::vector<bool> seen(N, false);
  for (std::size_t k = 0; k < banks.size(); ++k) {
    const std::string p = path + "/banks/" + std::to_string(k);
    const json& e = banks[k];
    rd.object(e, p, {"bank", "kind", "value", "freq", "t_start", "times", "values"});
    const auto bank = rd.unsigned_integer(rd.required(e, p, "bank"), p + "/bank");
    if (bank < 1 || bank > N) rd.fail(p + "/bank", "bank numbers run from 1 to " + std::to_string(N));
    if (seen[bank - 1]) rd.fail(p + "/bank", "bank listed twice");
    seen[bank - 1] = true;
    AttackSignal s;
    s.kind = signal_kind(rd, rd.required(e, p, "kind"), p + "/kind");
    if (e.contains("value")) s.value = rd.vector(e.at("value"), p + "/value");
    s.freq = rd.number_or(e, p, "freq", 0.0);
    s.t_start = rd.number_or(e, p, "t_start", 0.0);
    if (s.kind == SignalKind::Table) {
      read_table(rd, e, p, s.table_times, s.table_values);
    } else if (e.contains("times") || e.contains("values")) {
      rd.fail(p, "'times' and 'values' only apply to kind 'table'");
    }
    if (s.kind != SignalKind::None && s.kind != SignalKind::Table && s.value.size() == 0)
      rd.fail(p, "missing 'value'");
    a.banks[bank - 1] = std::move(s);
  }
  return a;
}

InputSignal read_input(const Reader& rd, const json& j, const std::string& path) {
  rd.object(j, path, {"kind", "value", "freq", "times", "values"});
  InputSignal s;
  s.kind = signal_kind(rd, rd.required(j, path, "kind"), path + "/kind");
  if (j.contains("value")) s.value = rd.vector(j.at("value"), path + "/value");
  s.freq = rd.number_or(j, path, "freq", 0.0);
  if (s.kind == SignalKind::Table) {
    read_table(rd, j, path, s.table_times, s.table_values);
  } else if (j.contains("times") || j.contains("values")) {
    rd.fail(path, "'times' and 'values' only apply to kind 'table'");
  }
  if (s.kind != SignalKind::None && s.kind != SignalKind::Table && s.value.size() == 0)
    rd.fail(path, "missing 'value'");
  return s;
}

InitSpec read_init(const Reader& rd, const json& j, const std::string& path) {
  InitSpec s;
  auto mode = [&](const std::string& m, const std::string& p) {
    if (m == "zero") return InitSpec::Mode::Zero;
    if (m == "random") return InitSpec::Mode::Random;
    if (m == "explicit") return InitSpec::Mode::Explicit;
    rd.fail(p, "expected 'zero', 'random' or 'explicit'");
  };
  if (j.is_string()) {
    s.mode = mode(j.get<std::string>(), path);
    if (s.mode == InitSpec::Mode::Explicit) rd.fail(path, "explicit initial values need 'values'");
    return s;
  }
  rd.object(j, path, {"mode", "values"});
  s.mode = mode(rd.string(rd.required(j, path, "mode"), path + "/mode"), path + "/mode");
  if (s.mode != InitSpec::Mode::Explicit) {
    if (j.contains("values")) rd.fail(path + "/values", "only explicit initial values take 'values'");
    return s;
  }
  const json& v = rd.required(j, path, "values");
  if (!v.is_array() || v.empty()) rd.fail(path + "/values", "expected a nonempty array");
  if (!v[0].is_array()) {
    s.values.push_back(rd.vector(v, path + "/values"));
  } else {
    for (std::size_t k = 0; k < v.size(); ++k)
      s.values.push_back(rd.vector(v[k], path + "/values/" + std::to_string(k)));
  }
  return s;
}

InitialState read_initial(const Reader& rd, const json& j, const std::string& path) {
  rd.object(j, path, {"x", "z", "xhat", "box", "seed"});
  InitialState s;
  if (j.contains("x")) s.x = read_init(rd, j.at("x"), path + "/x");
  if (j.contains("z")) s.z = read_init(rd, j.at("z"), path + "/z");
  if (j.contains("xhat")) s.xhat = read_init(rd, j.at("xhat"), path + "/xhat");
  s.box = rd.number_or(j, path, "box", s.box);
  if (j.contains("seed")) s.seed = rd.unsigned_integer(j.at("seed"), path + "/seed");
  return s;
}

SimSettings read_sim(const Reader& rd, const json& j, const std::string& path) {
  rd.object(j, path, {"horizon", "dt", "decimation", "record_from", "tail_fraction", "noise_std", "override_audit",
                      "blowup_threshold", "rank_tol", "membership_tol"});
  SimSettings s;
  s.horizon = rd.number_or(j, path, "horizon", s.horizon);
  s.dt = rd.number_or(j, path, "dt", s.dt);
  if (j.contains("decimation")) s.decimation = rd.unsigned_integer(j.at("decimation"), path + "/decimation");
  s.record_from = rd.number_or(j, path, "record_from", s.record_from);
  s.tail_fraction = rd.number_or(j, path, "tail_fraction", s.tail_fraction);
  s.noise_std = rd.number_or(j, path, "noise_std", s.noise_std);
  if (j.contains("override_audit")) s.override_audit = rd.boolean(j.at("override_audit"), path + "/override_audit");
  s.blowup_threshold = rd.number_or(j, path, "blowup_threshold", s.blowup_threshold);
  s.tolerances.rank_tol = rd.number_or(j, path, "rank_tol", s.tolerances.rank_tol);
  s.tolerances.membership_tol = rd.number_or(j, path, "membership_tol", s.tolerances.membership_tol);
  return s;
}

std::vector<Event> read_events(const Reader& rd, const json& j, const std::string& path) {
  if (!j.is_array()) rd.fail(path, "expected an array");
  std::vector<Event> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string p = path + "/" + std::to_string(k);
    rd.object(j[k], p, {"t", "action", "agent"});
    Event e;
    e.t = rd.number(rd.required(j[k], p, "t"), p + "/t");
    const std::string a = rd.string(rd.required(j[k], p, "action"), p + "/action");
    if (a == "join")
      e.action = Event::Action::Join;
    else if (a == "leave")
      e.action = Event::Action::Leave;
    else
      rd.fail(p + "/action", "expected 'join' or 'leave'");
    const auto agent = rd.unsigned_integer(rd.required(j[k], p, "agent"), p + "/agent");
    if (agent < 1) rd.fail(p + "/agent", "agents are numbered from 1");
    e.agent = agent - 1;
    out.push_back(e);
  }
  return out;
}

std::vector<std::pair<double, double>> read_windows(const Reader& rd, const json& j, const std::string& path) {
  if (!j.is_array()) rd.fail(path, "expected an array of [t0, t1] pairs");
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string p = path + "/" + std::to_string(k);
    if (!j[k].is_array() || j[k].size() != 2) rd.fail(p, "expected [t0, t1]");
    out.emplace_back(rd.number(j[k][0], p + "/0"), rd.number(j[k][1], p + "/1"));
  }
  return out;
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t k = 0; k < end; ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Eigen::MatrixXi& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Vector& v) {
  if (v.size() == 1) return v(0);
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

json flat(const Vector& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

json table_json(const std::vector<double>& times, const Matrix& values) {
  return {{"times", times}, {"values", to_json(values)}};
}

json init_json(const InitSpec& s) {
  switch (s.mode) {
    case InitSpec::Mode::Zero: return "zero";
    case InitSpec::Mode::Random: return "random";
    case InitSpec::Mode::Explicit: break;
  }
  json values = json::array();
  if (s.values.size() == 1) {
    values = flat(s.values[0]);
  } else {
    for (const Vector& v : s.values) values.push_back(flat(v));
  }
  return {{"mode", "explicit"}, {"values", values}};
}

json scenario_json(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  json plant;
  plant["A"] = to_json(sc.plant.A);
  if (sc.plant.B.cols() > 0) plant["B"] = to_json(sc.plant.B);
  plant["C"] = json::array();
  for (const Matrix& C : sc.plant.C_blocks) plant["C"].push_back(to_json(C));
  j["plant"] = plant;
  if (sc.basis) j["basis"] = to_json(*sc.basis);
  j["topology"] = {{"adjacency", to_json(sc.topology.adjacency())}};

  json est;
  est["kappa"] = sc.estimator.kappa;
  est["gamma"] = sc.estimator.gamma;
  est["variant"] = sc.estimator.variant == EstimatorVariant::Lyapunov ? "lyapunov" : "general";
  if (sc.estimator.P.size() > 0) est["P"] = to_json(sc.estimator.P);
  j["estimator"] = est;
  j["observer"] = {{"pole_target", sc.pole_target}, {"hurwitz_margin", sc.hurwitz_margin}};

  json attacks;
  attacks["q"] = sc.attacks.q;
  attacks["banks"] = json::array();
  for (std::size_t i = 0; i < sc.attacks.banks.size(); ++i) {
    const AttackSignal& a = sc.attacks.banks[i];
    if (a.kind == SignalKind::None) continue;
    json e = {{"bank", i + 1}, {"kind", kind_name(a.kind, false)}};
    if (a.value.size() > 0) e["value"] = to_json(a.value);
    if (a.freq != 0.0) e["freq"] = a.freq;
    if (a.t_start != 0.0) e["t_start"] = a.t_start;
    if (a.kind == SignalKind::Table) e.update(table_json(a.table_times, a.table_values));
    attacks["banks"].push_back(std::move(e));
  }
  j["attacks"] = attacks;

  json input = {{"kind", kind_name(sc.input.kind, true)}};
  if (sc.input.value.size() > 0) input["value"] = to_json(sc.input.value);
  if (sc.input.freq != 0.0) input["freq"] = sc.input.freq;
  if (sc.input.kind == SignalKind::Table) input.update(table_json(sc.input.table_times, sc.input.table_values));
  j["input"] = input;

  j["initial"] = {{"x", init_json(sc.initial.x)},
                  {"z", init_json(sc.initial.z)},
                  {"xhat", init_json(sc.initial.xhat)},
                  {"box", sc.initial.box},
                  {"seed", sc.initial.seed}};

  const SimSettings& s = sc.sim;
  j["sim"] = {{"horizon", s.horizon},
              {"dt", s.dt},
              {"decimation", s.decimation},
              {"record_from", s.record_from},
              {"tail_fraction", s.tail_fraction},
              {"noise_std", s.noise_std},
              {"override_audit", s.override_audit},
              {"blowup_threshold", s.blowup_threshold},
              {"rank_tol", s.tolerances.rank_tol},
              {"membership_tol", s.tolerances.membership_tol}};

  j["events"] = json::array();
  for (const Event& e : sc.events)
    j["events"].push_back({{"t", e.t},
                           {"action", e.action == Event::Action::Join ? "join" : "leave"},
                           {"agent", e.agent + 1}});
  j["windows"] = json::array();
  for (const auto& [t0, t1] : sc.windows) j["windows"].push_back({t0, t1});
  return j;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json metrics_json(const WindowMetrics& m) {
  return {{"t_from", m.t_from},
          {"t_to", m.t_to},
          {"max_inf_error", m.max_inf_error},
          {"max_euclid_error", m.max_euclid_error},
          {"sup_W", m.sup_W},
          {"sup_V", m.sup_V},
          {"residual_sup", m.residual_sup},
          {"agent_inf_error", m.agent_inf_error},
          {"theorem3_bound", opt(m.theorem3)},
          {"disagreement_bound", opt(m.w_bound)},
          {"theorem3_pass", m.theorem3 ? json(m.max_euclid_error <= *m.theorem3) : json(nullptr)}};
}

}  // namespace

Scenario parse_scenario(std::string_view text, std::string_view source) {
  const Reader rd{std::string(source)};
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_and_column(text, e.byte);
    std::ostringstream msg;
    msg << source << ":" << line << ":" << col << ": JSON syntax error: " << e.what();
    throw ScenarioError(msg.str());
  }

  rd.object(j, "", {"name", "plant", "basis", "topology", "estimator", "observer", "attacks", "input",
                    "initial", "sim", "events", "windows"});
  Scenario sc;
  if (j.contains("name")) sc.name = rd.string(j.at("name"), "/name");
  sc.plant = read_plant(rd, rd.required(j, "", "plant"), "/plant");
  const std::size_t N = sc.plant.bank_count();
  if (j.contains("basis")) sc.basis = rd.matrix(j.at("basis"), "/basis");
  sc.topology = read_topology(rd, rd.required(j, "", "topology"), "/topology", N);
  if (j.contains("estimator")) sc.estimator = read_estimator(rd, j.at("estimator"), "/estimator");
  if (j.contains("observer")) {
    const json& o = j.at("observer");
    rd.object(o, "/observer", {"pole_target", "hurwitz_margin"});
    sc.pole_target = rd.number_or(o, "/observer", "pole_target", sc.pole_target);
    sc.hurwitz_margin = rd.number_or(o, "/observer", "hurwitz_margin", sc.hurwitz_margin);
  }
  sc.attacks = j.contains("attacks") ? read_attacks(rd, j.at("attacks"), "/attacks", N)
                                     : AttackProfile{std::vector<AttackSignal>(N), 0};
  if (j.contains("input")) sc.input = read_input(rd, j.at("input"), "/input");
  if (j.contains("initial")) sc.initial = read_initial(rd, j.at("initial"), "/initial");
  if (j.contains("sim")) sc.sim = read_sim(rd, j.at("sim"), "/sim");
  if (j.contains("events")) sc.events = read_events(rd, j.at("events"), "/events");
  if (j.contains("windows")) sc.windows = read_windows(rd, j.at("windows"), "/windows");

  try {
    sc.validate();
  } catch (const ScenarioError& e) {
    throw ScenarioError(std::string(source) + ": " + e.what());
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string serialize_scenario(const Scenario& scenario) { return scenario_json(scenario).dump(2) + "\n"; }

std::vector<std::string> log_columns(const TrajectoryLog& log) {
  std::vector<std::string> cols{"t"};
  for (std::size_t k = 1; k <= log.n; ++k) cols.push_back("x" + std::to_string(k));
  for (std::size_t i = 0; i < log.observable_dims.size(); ++i) {
    const std::string a = std::to_string(i + 1);
    for (std::size_t k = 1; k <= log.n; ++k) cols.push_back("xhat" + a + "_" + std::to_string(k));
    for (std::size_t k = 1; k <= log.observable_dims[i]; ++k) cols.push_back("z" + a + "_" + std::to_string(k));
    cols.push_back("residual" + a);
  }
  for (std::size_t k = 1; k <= log.n; ++k) cols.push_back("xbar_avg" + std::to_string(k));
  cols.push_back("W");
  cols.push_back("V");
  return cols;
}

void write_log_csv(const TrajectoryLog& log, std::ostream& out) {
  const auto cols = log_columns(log);
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << "\n";
  out << std::setprecision(12);
  for (const LogSample& s : log.samples) {
    out << s.t;
    for (Eigen::Index k = 0; k < s.x.size(); ++k) out << "," << s.x(k);
    for (std::size_t i = 0; i < s.xhat.size(); ++i) {
      for (Eigen::Index k = 0; k < s.xhat[i].size(); ++k) out << "," << s.xhat[i](k);
      for (Eigen::Index k = 0; k < s.z[i].size(); ++k) out << "," << s.z[i](k);
      out << "," << s.residual(static_cast<Eigen::Index>(i));
    }
    for (Eigen::Index k = 0; k < s.xbar_avg.size(); ++k) out << "," << s.xbar_avg(k);
    out << "," << s.W << "," << s.V << "\n";
  }
}

std::string sidecar_json(const Scenario& scenario, const TrajectoryLog& log, const WindowMetrics& tail,
                         const std::vector<WindowMetrics>& windows) {
  json j;
  j["scenario"] = scenario_json(scenario);
  j["seed"] = log.seed;
  j["assumption_violating"] = log.assumption_violating;
  j["columns"] = log_columns(log);

  json audit;
  audit["q"] = log.audit.q;
  audit["entries"] = json::array();
  for (std::size_t k = 0; k < log.audit.entries.size(); ++k) {
    const auto& e = log.audit.entries[k];
    audit["entries"].push_back(
        {{"assumption", k + 1}, {"name", e.name}, {"pass", e.pass}, {"evidence", e.evidence}});
  }
  audit["column_counts"] = log.audit.column_counts;
  audit["indicator_redundancy"] = log.audit.indicator_redundancy;
  j["audit"] = audit;

  j["events"] = json::array();
  for (const EventAudit& e : log.event_audits)
    j["events"].push_back({{"t", e.t},
                           {"action", e.action == Event::Action::Join ? "join" : "leave"},
                           {"agent", e.agent + 1},
                           {"connected", e.connected},
                           {"redundant", e.redundant},
                           {"lambda2", e.lambda2}});

  j["basis"] = {{"V", to_json(log.basis.V)},
                {"W", to_json(log.basis.W)},
                {"indicators", to_json(log.basis.indicators)},
                {"observable_dims", log.observable_dims}};
  j["bounds"] = {{"lambda2", log.final_lambda2},
                 {"agents", log.final_agents},
                 {"theorem3", opt(log.theorem3)},
                 {"disagreement", opt(log.w_bound)},
                 {"weight_norm", opt(log.weight_norm)},
                 {"weight_coupling", opt(log.weight_coupling)}};
  j["tail_metrics"] = metrics_json(tail);
  j["windows"] = json::array();
  for (const WindowMetrics& w : windows) j["windows"].push_back(metrics_json(w));
  return j.dump(2) + "\n";
}

void write_median_csv(const MedianRun& run, std::ostream& out) {
  const Eigen::Index N = run.states.empty() ? 0 : run.states.front().size();
  out << "t";
  for (Eigen::Index i = 1; i <= N; ++i) out << ",x_" << i;
  out << ",dist_to_median_set\n" << std::setprecision(12);
  for (std::size_t k = 0; k < run.times.size(); ++k) {
    out << run.times[k];
    for (Eigen::Index i = 0; i < N; ++i) out << "," << run.states[k](i);
    out << "," << run.distance[k] << "\n";
  }
}

}  // namespace resest
