#include "knngate/config.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>

namespace knngate {

namespace {

struct RawValue {
  std::string text;
  int line = 0;
  mutable bool used = false;
};

using Section = std::map<std::string, RawValue>;

struct RawConfig {
  std::map<std::string, Section> sections;  // "" is the top level
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

RawConfig tokenize(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  std::string current;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": unterminated section header");
      }
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": empty section name");
      }
      raw.sections[current];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected `key = value`");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    auto [it, inserted] =
        raw.sections[current].emplace(key, RawValue{value, line_no});
    if (!inserted) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": duplicate key `" + key + "`");
    }
  }
  return raw;
}

class SectionReader {
 public:
  SectionReader(const RawConfig& raw, std::string name) : name_(name) {
    const auto it = raw.sections.find(name);
    if (it == raw.sections.end()) {
      throw ConfigError("missing section [" + name + "]");
    }
    section_ = &it->second;
  }

  const RawValue* find(const std::string& key) const {
    const auto it = section_->find(key);
    if (it == section_->end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  const RawValue& require(const std::string& key) const {
    const RawValue* v = find(key);
    if (!v) {
      throw ConfigError("missing required key `" + key + "` in [" + name_ +
                        "]");
    }
    return *v;
  }

  std::string get_string(const std::string& key) const {
    return require(key).text;
  }

  std::optional<std::string> get_string_opt(const std::string& key) const {
    const RawValue* v = find(key);
    if (!v) return std::nullopt;
    return v->text;
  }

  double parse_double(const std::string& key, const RawValue& v) const {
    try {
      std::size_t pos = 0;
      const double out = std::stod(v.text, &pos);
      if (pos != v.text.size()) throw std::invalid_argument("");
      return out;
    } catch (...) {
      throw ConfigError("line " + std::to_string(v.line) + ": key `" + key +
                        "` is not a number: " + v.text);
    }
  }

  double get_double(const std::string& key) const {
    return parse_double(key, require(key));
  }

  double get_double_or(const std::string& key, double fallback) const {
    const RawValue* v = find(key);
    return v ? parse_double(key, *v) : fallback;
  }

  std::uint64_t get_u64(const std::string& key) const {
    const RawValue& v = require(key);
    try {
      std::size_t pos = 0;
      const unsigned long long out = std::stoull(v.text, &pos);
      if (pos != v.text.size()) throw std::invalid_argument("");
      return out;
    } catch (...) {
      throw ConfigError("line " + std::to_string(v.line) + ": key `" + key +
                        "` is not a nonnegative integer: " + v.text);
    }
  }

  std::vector<double> split_doubles(const std::string& key,
                                    const std::string& text, int line) const {
    std::vector<double> out;
    std::string token;
    std::istringstream in(text);
    std::string normalized = text;
    for (char& c : normalized) {
      if (c == ',') c = ' ';
    }
    std::istringstream stream(normalized);
    while (stream >> token) {
      try {
        std::size_t pos = 0;
        out.push_back(std::stod(token, &pos));
        if (pos != token.size()) throw std::invalid_argument("");
      } catch (...) {
        throw ConfigError("line " + std::to_string(line) + ": key `" + key +
                          "` has a non-numeric entry: " + token);
      }
    }
    return out;
  }

  std::vector<double> get_doubles(const std::string& key) const {
    const RawValue& v = require(key);
    return split_doubles(key, v.text, v.line);
  }

  std::optional<std::vector<double>> get_doubles_opt(
      const std::string& key) const {
    const RawValue* v = find(key);
    if (!v) return std::nullopt;
    return split_doubles(key, v->text, v->line);
  }

  /// Rows separated by ';', entries by commas or whitespace.
  std::vector<std::vector<double>> get_matrix(const std::string& key) const {
    const RawValue& v = require(key);
    std::vector<std::vector<double>> rows;
    std::size_t start = 0;
    for (;;) {
      const std::size_t semi = v.text.find(';', start);
      const std::string chunk =
          semi == std::string::npos ? v.text.substr(start)
                                    : v.text.substr(start, semi - start);
      rows.push_back(split_doubles(key, chunk, v.line));
      if (semi == std::string::npos) break;
      start = semi + 1;
    }
    return rows;
  }

  void reject_unused() const {
    for (const auto& [key, value] : *section_) {
      if (!value.used) {
        throw ConfigError("line " + std::to_string(value.line) +
                          ": unknown key `" + key + "` in [" + name_ + "]");
      }
    }
  }

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  const Section* section_;
};

Scenario read_scenario(const SectionReader& sc) {
  const auto dim = std::size_t(sc.get_u64("d"));
  const auto labels = std::size_t(sc.get_u64("labels"));

  const std::string law_name = sc.get_string("input_law");
  InputLaw law;
  if (law_name == "ball") {
    law = BallLaw{sc.get_double("radius")};
  } else if (law_name == "box") {
    law = BoxLaw{sc.get_doubles("lo"), sc.get_doubles("hi")};
  } else if (law_name == "gaussian") {
    law = GaussianLaw{sc.get_doubles("mean"), sc.get_double("scale")};
  } else {
    throw ConfigError("key `input_law` must be ball, box, or gaussian (got " +
                      law_name + ")");
  }

  SoftmaxConditional conditional{sc.get_matrix("weights"),
                                 sc.get_doubles("offsets")};

  const std::string q0_name = sc.get_string("q0");
  Q0Spec q0;
  if (q0_name == "bayes") {
    q0 = Q0Bayes{};
  } else if (q0_name == "tempered") {
    q0 = Q0Tempered{sc.get_double("q0_tau")};
  } else if (q0_name == "shifted") {
    q0 = Q0Shifted{sc.get_doubles("q0_shift")};
  } else if (q0_name == "contaminated") {
    q0 = Q0Contaminated{sc.get_double("q0_alpha")};
  } else if (q0_name == "permuted") {
    std::vector<Label> sigma;
    for (double v : sc.get_doubles("q0_sigma")) {
      sigma.push_back(Label(v));
    }
    q0 = Q0Permuted{std::move(sigma)};
  } else {
    throw ConfigError(
        "key `q0` must be bayes, tempered, shifted, contaminated, or "
        "permuted (got " +
        q0_name + ")");
  }

  const std::string deform_name = sc.get_string("deformation");
  Deformation deformation;
  if (deform_name == "none") {
    deformation = std::monostate{};
  } else if (deform_name == "shift") {
    deformation = ConstantShift{sc.get_doubles("shift")};
  } else if (deform_name == "push") {
    deformation = RadialPush{sc.get_double("push")};
  } else {
    throw ConfigError("key `deformation` must be none, shift, or push (got " +
                      deform_name + ")");
  }

  const double rho = sc.get_double("rho");

  const std::string spurious_name = sc.get_string("spurious");
  SpuriousLaw spurious;
  if (spurious_name == "uniform") {
    spurious = SpuriousUniform{};
  } else if (spurious_name == "point_mass") {
    spurious = SpuriousPointMass{Label(sc.get_u64("spurious_label"))};
  } else {
    throw ConfigError("key `spurious` must be uniform or point_mass (got " +
                      spurious_name + ")");
  }

  try {
    return Scenario(dim, labels, std::move(law), std::move(conditional),
                    std::move(q0), std::move(deformation), rho,
                    std::move(spurious));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid [scenario]: ") + e.what());
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += fmt_double(values[i]);
  }
  return out;
}

}  // namespace

SimulationSpec parse_simulation_config(const std::string& text) {
  const RawConfig raw = tokenize(text);

  const auto top = raw.sections.find("");
  if (top == raw.sections.end() || !top->second.count("schema_version")) {
    throw ConfigError("missing required key `schema_version`");
  }
  SectionReader top_reader(raw, "");
  if (top_reader.get_u64("schema_version") != 1) {
    throw ConfigError("unsupported schema_version (expected 1)");
  }
  top_reader.reject_unused();

  SectionReader sc(raw, "scenario");
  Scenario scenario = read_scenario(sc);
  sc.reject_unused();

  SectionReader sw(raw, "sweep");
  SimulationSpec spec{ExperimentKind::ModeStability,
                      SweepConfig{std::move(scenario),
                                  {},
                                  KByPower{0.6},
                                  1,
                                  {},
                                  0,
                                  0.0,
                                  0.3,
                                  1.0,
                                  0}};
  try {
    spec.kind = experiment_from_name(sw.get_string("experiment"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  for (double v : sw.get_doubles("n_grid")) {
    if (v < 1 || v != std::floor(v)) {
      throw ConfigError("key `n_grid` entries must be positive integers");
    }
    spec.sweep.n_grid.push_back(std::size_t(v));
  }
  if (spec.sweep.n_grid.empty()) {
    throw ConfigError("key `n_grid` must list at least one memory size");
  }

  const auto k_beta = sw.get_string_opt("k_beta");
  const auto k_grid = sw.get_doubles_opt("k_grid");
  if (k_beta && k_grid) {
    throw ConfigError("specify either `k_beta` or `k_grid`, not both");
  }
  if (k_grid) {
    std::vector<std::size_t> ks;
    for (double v : *k_grid) {
      if (v < 1 || v != std::floor(v)) {
        throw ConfigError("key `k_grid` entries must be positive integers");
      }
      ks.push_back(std::size_t(v));
    }
    spec.sweep.k_rule = std::move(ks);
  } else if (k_beta) {
    spec.sweep.k_rule = KByPower{sw.get_double("k_beta")};
  } else {
    throw ConfigError("missing required key `k_beta` or `k_grid` in [sweep]");
  }

  spec.sweep.reps = std::size_t(sw.get_u64("reps"));
  spec.sweep.zeta = sw.get_double_or("zeta", 0.0);
  spec.sweep.delta = sw.get_double_or("delta", 0.3);
  spec.sweep.bandwidth = sw.get_double_or("bandwidth", 1.0);
  spec.sweep.master_seed = sw.get_u64("master_seed");

  const auto queries = sw.find("queries");
  const auto sampled = sw.find("num_sampled_queries");
  if (queries && sampled) {
    throw ConfigError(
        "specify either `queries` or `num_sampled_queries`, not both");
  }
  if (queries) {
    spec.sweep.queries = sw.get_matrix("queries");
  } else if (sampled) {
    spec.sweep.num_sampled_queries =
        std::size_t(sw.get_u64("num_sampled_queries"));
    if (spec.sweep.num_sampled_queries == 0) {
      throw ConfigError("key `num_sampled_queries` must be >= 1");
    }
  } else {
    throw ConfigError(
        "missing required key `queries` or `num_sampled_queries` in [sweep]");
  }
  sw.reject_unused();

  // Surface grid/query mistakes at parse time with the config error code.
  try {
    resolve_k_grid(spec.sweep);
    for (const auto& q : spec.sweep.queries) {
      if (q.size() != spec.sweep.scenario.dim()) {
        throw std::invalid_argument("query point dimension mismatch");
      }
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid [sweep]: ") + e.what());
  }
  return spec;
}

std::string write_simulation_config(const SimulationSpec& spec) {
  const Scenario& scenario = spec.sweep.scenario;
  std::ostringstream out;
  out << "schema_version = 1\n\n[scenario]\n";
  out << "d = " << scenario.dim() << "\n";
  out << "labels = " << scenario.num_labels() << "\n";
  if (const auto* ball = std::get_if<BallLaw>(&scenario.input_law())) {
    out << "input_law = ball\nradius = " << fmt_double(ball->radius) << "\n";
  } else if (const auto* box = std::get_if<BoxLaw>(&scenario.input_law())) {
    out << "input_law = box\nlo = " << join_doubles(box->lo)
        << "\nhi = " << join_doubles(box->hi) << "\n";
  } else {
    const auto& gauss = std::get<GaussianLaw>(scenario.input_law());
    out << "input_law = gaussian\nmean = " << join_doubles(gauss.mean)
        << "\nscale = " << fmt_double(gauss.scale) << "\n";
  }
  out << "weights = ";
  for (std::size_t y = 0; y < scenario.num_labels(); ++y) {
    if (y) out << " ; ";
    out << join_doubles(scenario.conditional().weights[y]);
  }
  out << "\noffsets = " << join_doubles(scenario.conditional().offsets)
      << "\n";
  if (std::holds_alternative<Q0Bayes>(scenario.q0_spec())) {
    out << "q0 = bayes\n";
  } else if (const auto* t = std::get_if<Q0Tempered>(&scenario.q0_spec())) {
    out << "q0 = tempered\nq0_tau = " << fmt_double(t->tau) << "\n";
  } else if (const auto* s = std::get_if<Q0Shifted>(&scenario.q0_spec())) {
    out << "q0 = shifted\nq0_shift = " << join_doubles(s->delta) << "\n";
  } else if (const auto* c = std::get_if<Q0Contaminated>(&scenario.q0_spec())) {
    out << "q0 = contaminated\nq0_alpha = " << fmt_double(c->alpha) << "\n";
  } else {
    const auto& p = std::get<Q0Permuted>(scenario.q0_spec());
    out << "q0 = permuted\nq0_sigma = ";
    for (std::size_t i = 0; i < p.sigma.size(); ++i) {
      if (i) out << ", ";
      out << p.sigma[i];
    }
    out << "\n";
  }
  if (std::holds_alternative<std::monostate>(scenario.deformation())) {
    out << "deformation = none\n";
  } else if (const auto* s =
                 std::get_if<ConstantShift>(&scenario.deformation())) {
    out << "deformation = shift\nshift = " << join_doubles(s->shift) << "\n";
  } else {
    const auto& p = std::get<RadialPush>(scenario.deformation());
    out << "deformation = push\npush = " << fmt_double(p.t) << "\n";
  }
  out << "rho = " << fmt_double(scenario.corruption_rate()) << "\n";
  if (const auto* pm = std::get_if<SpuriousPointMass>(&scenario.spurious())) {
    out << "spurious = point_mass\nspurious_label = " << pm->label << "\n";
  } else {
    out << "spurious = uniform\n";
  }

  out << "\n[sweep]\n";
  out << "experiment = " << experiment_name(spec.kind) << "\n";
  out << "n_grid = ";
  for (std::size_t i = 0; i < spec.sweep.n_grid.size(); ++i) {
    if (i) out << ", ";
    out << spec.sweep.n_grid[i];
  }
  out << "\n";
  if (const auto* power = std::get_if<KByPower>(&spec.sweep.k_rule)) {
    out << "k_beta = " << fmt_double(power->beta) << "\n";
  } else {
    const auto& ks = std::get<std::vector<std::size_t>>(spec.sweep.k_rule);
    out << "k_grid = ";
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (i) out << ", ";
      out << ks[i];
    }
    out << "\n";
  }
  out << "reps = " << spec.sweep.reps << "\n";
  out << "zeta = " << fmt_double(spec.sweep.zeta) << "\n";
  out << "delta = " << fmt_double(spec.sweep.delta) << "\n";
  out << "bandwidth = " << fmt_double(spec.sweep.bandwidth) << "\n";
  out << "master_seed = " << spec.sweep.master_seed << "\n";
  if (!spec.sweep.queries.empty()) {
    out << "queries = ";
    for (std::size_t i = 0; i < spec.sweep.queries.size(); ++i) {
      if (i) out << " ; ";
      out << join_doubles(spec.sweep.queries[i]);
    }
    out << "\n";
  } else {
    out << "num_sampled_queries = " << spec.sweep.num_sampled_queries << "\n";
  }
  return out.str();
}

}  // namespace knngate
