#include "qmetric/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "qmetric/error.hpp"
#include "qmetric/io.hpp"
#include "qmetric/metrics.hpp"

namespace qmetric {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// config helpers

struct Tolerances {
  double order = 1e-9;            // slack on ordering checks d_inf <= d_2 etc.
  double heuristic_lower = 1e-6;  // heuristic >= d_inf - this
  double norm_tol = 1e-9;
  int norm_max_iter = 10000;
  double monotone = 1e-12;        // allowed increase in "decreasing" sequences
  double psd = 1e-8;

  json to_json() const {
    return {{"order", order},       {"heuristic_lower", heuristic_lower}, {"norm_tol", norm_tol},
            {"norm_max_iter", norm_max_iter}, {"monotone", monotone},   {"psd", psd}};
  }
};

double get_number(const json& cfg, const char* key, double fallback, const std::string& path = "") {
  if (!cfg.contains(key)) return fallback;
  if (!cfg[key].is_number()) throw ConfigError(path + key, "expected a number");
  return cfg[key].get<double>();
}

int get_int(const json& cfg, const char* key, std::optional<int> fallback, const std::string& path = "") {
  if (!cfg.contains(key)) {
    if (!fallback) throw ConfigError(path + key, "missing field");
    return *fallback;
  }
  if (!cfg[key].is_number_integer()) throw ConfigError(path + key, "expected an integer");
  return cfg[key].get<int>();
}

int get_positive(const json& cfg, const char* key, std::optional<int> fallback) {
  const int v = get_int(cfg, key, fallback);
  if (v < 1) throw ConfigError(key, "must be positive");
  return v;
}

Tolerances read_tolerances(const json& cfg) {
  Tolerances t;
  if (!cfg.contains("tolerances")) return t;
  const auto& j = cfg["tolerances"];
  if (!j.is_object()) throw ConfigError("tolerances", "expected an object");
  t.order = get_number(j, "order", t.order, "tolerances.");
  t.heuristic_lower = get_number(j, "heuristic_lower", t.heuristic_lower, "tolerances.");
  t.norm_tol = get_number(j, "norm_tol", t.norm_tol, "tolerances.");
  t.norm_max_iter = get_int(j, "norm_max_iter", t.norm_max_iter, "tolerances.");
  t.monotone = get_number(j, "monotone", t.monotone, "tolerances.");
  t.psd = get_number(j, "psd", t.psd, "tolerances.");
  if (!(t.norm_tol > 0)) throw ConfigError("tolerances.norm_tol", "must be positive");
  return t;
}

/// An inline object, or a string naming a JSON file relative to base_dir.
json resolve(const json& v, const std::string& base_dir, const std::string& path) {
  if (!v.is_string()) return v;
  std::filesystem::path p(v.get<std::string>());
  if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
  return io::load_json_file(p.string(), path);
}

Group load_group(const json& cfg, const std::string& base_dir) {
  if (!cfg.is_object() || !cfg.contains("group")) throw ConfigError("group", "missing field");
  return io::parse_group(resolve(cfg["group"], base_dir, "group"), "group");
}

struct NamedState {
  std::string name;
  StateRep state;
};

NamedState load_state(const json& v, const Group& group, const std::string& base_dir, const std::string& path,
                      std::size_t index) {
  const json j = resolve(v, base_dir, path);
  auto s = io::parse_state(j, group, path);
  std::string name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>()
                                                                 : std::string(s.kind()) + "#" + std::to_string(index);
  return {std::move(name), std::move(s)};
}

/// Uniform point in the closed unit disk.
cplx random_disk(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    cplx z(u(rng), u(rng));
    if (std::norm(z) <= 1.0) return z;
  }
}

/// Random finitely supported generator b, support drawn from ball(support_radius).
AlgebraElement random_generator(const Ball& pool, std::size_t max_support, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> size_dist(1, max_support);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  AlgebraElement b;
  const std::size_t want = std::min(size_dist(rng), pool.size());
  while (b.support_size() < want) {
    const auto& g = pool[pick(rng)].element;
    if (b.coeff(g) != cplx{}) continue;
    cplx c = random_disk(rng);
    if (c == cplx{}) continue;
    b.add(g, c);
  }
  return b;
}

std::vector<NamedState> random_states(const json& spec, const Group& group) {
  const std::string path = "random_states";
  if (!spec.is_object()) throw ConfigError(path, "expected an object");
  const int count = get_int(spec, "count", std::nullopt, path + ".");
  const auto seed = static_cast<std::uint64_t>(get_int(spec, "seed", 7, path + "."));
  const std::string kind = spec.value("kind", std::string("density"));
  const int radius = get_int(spec, "support_radius", 2, path + ".");
  const int max_support = get_int(spec, "max_support", 4, path + ".");
  if (count < 0 || radius < 0 || max_support < 1) throw ConfigError(path, "count, support_radius, max_support out of range");

  std::mt19937_64 rng(seed);
  std::vector<NamedState> out;
  if (kind == "density") {
    const Ball pool = enumerate_ball(group, radius);
    for (int i = 0; i < count; ++i)
      out.push_back({"random_density#" + std::to_string(i),
                     StateRep::density(group, random_generator(pool, static_cast<std::size_t>(max_support), rng))});
  } else if (kind == "character") {
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    for (int i = 0; i < count; ++i) {
      std::vector<cplx> z;
      for (std::size_t k = 0; k < group.z_rank(); ++k) z.push_back(std::polar(1.0, angle(rng)));
      out.push_back({"random_character#" + std::to_string(i), StateRep::character(group, std::move(z))});
    }
  } else {
    throw ConfigError(path + ".kind", "expected 'density' or 'character'");
  }
  return out;
}

std::vector<NamedState> load_states(const json& cfg, const Group& group, const std::string& base_dir) {
  std::vector<NamedState> out;
  if (cfg.contains("states")) {
    const auto& arr = cfg["states"];
    if (!arr.is_array()) throw ConfigError("states", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      out.push_back(load_state(arr[i], group, base_dir, "states[" + std::to_string(i) + "]", i));
  }
  if (cfg.contains("random_states")) {
    auto more = random_states(cfg["random_states"], group);
    for (auto& s : more) out.push_back(std::move(s));
  }
  return out;
}

/// growth_fit when the radius allows it; otherwise only the shell data and bound.
GrowthReport growth_fit_or_empty(const Ball& ball) {
  if (ball.radius() >= 3) return growth_fit(ball);
  GrowthReport g;
  g.shell_sizes = ball.shell_sizes();
  if (auto b = analytic_shell_bound(ball.group())) g.shell_bound = ShellBound{*b, BoundProvenance::analytic};
  return g;
}

json num(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return v;
}

Report make_report(const std::string& name, const json& config, const Tolerances& tol) {
  Report r;
  r.experiment = name;
  r.meta = {{"tool", "qmetric"},
            {"version", kToolVersion},
            {"experiment", name},
            {"config_hash", config_hash(config)},
            {"tolerances", tol.to_json()}};
  return r;
}

std::string fmt_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return v.dump();
  if (v.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  return v.dump();
}

}  // namespace

// ---------------------------------------------------------------------------
// Report

std::string Report::to_csv() const {
  std::ostringstream os;
  os << "# meta " << meta.dump() << '\n';
  os << "# status " << (passed() ? "pass" : "fail") << '\n';
  for (const auto& f : failures) os << "# failure " << f << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt_cell(row[i]);
    os << '\n';
  }
  return os.str();
}

std::string Report::to_json() const {
  json j;
  j["meta"] = meta;
  j["status"] = passed() ? "pass" : "fail";
  j["failures"] = failures;
  j["columns"] = columns;
  json rs = json::array();
  for (const auto& row : rows) {
    json o = json::object();
    for (std::size_t i = 0; i < row.size() && i < columns.size(); ++i) o[columns[i]] = row[i];
    rs.push_back(std::move(o));
  }
  j["rows"] = std::move(rs);
  return j.dump(2) + "\n";
}

std::string config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// ball / growth / summable

namespace {

void ball_rows(Report& rep, const Ball& ball) {
  rep.columns = {"radius", "ball_size", "shell_size", "partial_square_sum", "tail_bound"};
  const auto bound = analytic_shell_bound(ball.group());
  std::size_t cum = 0;
  double partial = 0;
  for (int k = 0; k <= ball.radius(); ++k) {
    const auto s = ball.shell_sizes()[k];
    cum += s;
    if (k > 0) partial += static_cast<double>(s) / (double(k) * k);
    json tail = (k > 0 && bound) ? json(static_cast<double>(*bound) / k) : json();
    rep.rows.push_back({k, cum, s, partial, tail});
    rep.curves["ball_size"].emplace_back(k, static_cast<double>(cum));
    if (k > 0) rep.curves["partial_square_sum"].emplace_back(k, partial);
  }
}

}  // namespace

Report run_ball(const json& config, const std::string& base_dir) {
  const auto tol = read_tolerances(config);
  const Group group = load_group(config, base_dir);
  const int r = get_int(config, "radius", std::nullopt);
  if (r < 0) throw ConfigError("radius", "must be non-negative");
  Report rep = make_report("ball", config, tol);
  rep.meta["group"] = group.describe();
  const Ball ball = enumerate_ball(group, r);
  ball_rows(rep, ball);

  // axioms on the enumerated ball: L(e) = 0, L(g^-1) = L(g), L(gh) <= L(g) + L(h)
  if (ball[0].length != 0 || !group.is_identity(ball[0].element)) rep.failures.push_back("identity is not at length 0");
  for (const auto& e : ball.entries())
    if (length(ball, group.inv(e.element)) != e.length)
      rep.failures.push_back("L(g^-1) != L(g) at " + to_string(e.element));
  if (ball.size() <= 3000) {
    for (const auto& a : ball.entries())
      for (const auto& b : ball.entries()) {
        auto i = ball.index_of(group.mul(a.element, b.element));
        if (i && ball[*i].length > a.length + b.length)
          rep.failures.push_back("subadditivity fails at " + to_string(a.element) + "*" + to_string(b.element));
      }
  }
  return rep;
}

Report run_growth(const json& config, const std::string& base_dir) {
  const auto tol = read_tolerances(config);
  const Group group = load_group(config, base_dir);
  const int r = get_int(config, "radius", std::nullopt);
  Report rep = make_report("growth", config, tol);
  rep.meta["group"] = group.describe();
  const Ball ball = enumerate_ball(group, r);
  const auto g = growth_fit(ball);
  ball_rows(rep, ball);
  rep.meta["fit_k"] = g.fit_k;
  rep.meta["fit_l"] = g.fit_l;
  rep.meta["residual"] = g.residual;
  if (g.shell_bound) {
    rep.meta["shell_bound"] = g.shell_bound->value;
    rep.meta["shell_bound_provenance"] =
        g.shell_bound->provenance == BoundProvenance::analytic ? "analytic" : "empirical";
  } else {
    rep.meta["shell_bound"] = nullptr;
  }

  auto check_cap = [&](std::size_t cap, const std::string& what) {
    for (int k = 1; k <= r; ++k)
      if (g.shell_sizes[k] > cap)
        rep.failures.push_back("shell " + std::to_string(k) + " has " + std::to_string(g.shell_sizes[k]) +
                               " elements, above the " + what + " " + std::to_string(cap));
  };
  if (g.shell_bound && g.shell_bound->provenance == BoundProvenance::analytic) check_cap(g.shell_bound->value, "analytic bound");
  if (config.contains("expect_shell_max")) check_cap(static_cast<std::size_t>(get_positive(config, "expect_shell_max", std::nullopt)), "expected maximum");
  return rep;
}

Report run_summable(const json& config, const std::string& base_dir) {
  const auto tol = read_tolerances(config);
  const Group group = load_group(config, base_dir);
  if (!config.contains("radii") || !config["radii"].is_array() || config["radii"].empty())
    throw ConfigError("radii", "expected a non-empty array of radii");
  std::vector<int> radii;
  for (std::size_t i = 0; i < config["radii"].size(); ++i) {
    const auto& v = config["radii"][i];
    if (!v.is_number_integer() || v.get<int>() < 1) throw ConfigError("radii[" + std::to_string(i) + "]", "must be a positive integer");
    radii.push_back(v.get<int>());
  }
  std::sort(radii.begin(), radii.end());
  const std::string expect = config.value("expect", std::string("none"));
  if (expect != "none" && expect != "convergent" && expect != "divergent")
    throw ConfigError("expect", "expected 'convergent', 'divergent' or 'none'");

  Report rep = make_report("summable", config, tol);
  rep.meta["group"] = group.describe();
  rep.columns = {"radius", "ball_size", "partial_square_sum", "tail_bound"};
  const Ball ball = enumerate_ball(group, radii.back());
  double prev = -1;
  for (int r : radii) {
    double partial = 0;
    for (int k = 1; k <= r; ++k) partial += static_cast<double>(ball.shell_sizes()[k]) / (double(k) * k);
    const auto bound = analytic_shell_bound(group);
    rep.rows.push_back({r, ball.cumulative_size(r), partial, bound ? json(static_cast<double>(*bound) / r) : json()});
    rep.curves["partial_square_sum"].emplace_back(r, partial);
    if (partial < prev) rep.failures.push_back("partial sums decreased at radius " + std::to_string(r));
    prev = partial;
  }
  if (expect == "divergent") {
    const double threshold = get_number(config, "threshold", 0.0);
    if (!(prev > threshold))
      rep.failures.push_back("partial sum " + std::to_string(prev) + " did not exceed threshold " + std::to_string(threshold));
    if (analytic_shell_bound(group)) rep.failures.push_back("divergence expected but the family has an analytic shell bound");
  } else if (expect == "convergent") {
    if (!analytic_shell_bound(group)) rep.failures.push_back("convergence expected but no analytic shell bound is known");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// distances

namespace {

struct PairRow {
  MetricBracket inf, two;
  std::optional<HeuristicResult> heur;
  double heuristic_floor = 0.0;  // d_inf over the heuristic's support ball
};

PairRow evaluate_pair(const StateRep& a, const StateRep& b, const Group& group, const Ball& ball,
                      const GrowthReport& growth, bool heuristic, int support, int trunc, const Tolerances& tol) {
  PairRow row;
  row.inf = d_inf(a, b, ball);
  row.two = d_2(a, b, ball, growth);
  if (heuristic) {
    HeuristicOptions ho;
    ho.norm = NormOptions{tol.norm_tol, tol.norm_max_iter, NormMethod::lanczos};
    row.heur = connes_heuristic(a, b, group, support, trunc, ho);
    const Ball sball = enumerate_ball(group, support);
    row.heuristic_floor = d_inf(a, b, sball).lo;
  }
  return row;
}

/// Non-fatal notes on a pair: an ascent that stopped at its iteration cap.
void note_warnings(Report& rep, const PairRow& row, const std::string& label) {
  if (row.heur && !row.heur->converged) {
    if (!rep.meta.contains("warnings")) rep.meta["warnings"] = json::array();
    rep.meta["warnings"].push_back(label + ": heuristic ascent hit its iteration cap");
  }
}

/// The sandwich ordering checks; returns the list of violated relations.
std::vector<std::string> check_order(const PairRow& row, const Tolerances& tol) {
  std::vector<std::string> bad;
  if (row.inf.lo > row.two.lo + tol.order) bad.push_back("d_inf.lo > d_2.lo");
  if (row.inf.lo > row.two.hi + tol.order) bad.push_back("d_inf.lo > d_2.hi");
  if (row.heur) {
    const double h = row.heur->estimate;
    if (h < row.heuristic_floor - tol.heuristic_lower) bad.push_back("heuristic < d_inf");
    if (row.two.hi_finite() && h > row.two.hi + std::max(0.0, row.heur->sigma_drift) + tol.order)
      bad.push_back("heuristic > d_2.hi + sigma drift");
  }
  return bad;
}

std::string read_mode(const json& config) {
  const std::string mode = config.value("mode", std::string("both"));
  if (mode != "bracket" && mode != "heuristic" && mode != "both")
    throw ConfigError("mode", "expected 'bracket', 'heuristic' or 'both'");
  return mode;
}

}  // namespace

Report run_dist(const json& config, const std::string& base_dir) {
  const auto tol = read_tolerances(config);
  const Group group = load_group(config, base_dir);
  if (!config.contains("state_a") || !config.contains("state_b")) throw ConfigError("state_a", "state_a and state_b are required");
  const auto a = load_state(config["state_a"], group, base_dir, "state_a", 0);
  const auto b = load_state(config["state_b"], group, base_dir, "state_b", 1);
  const int r = get_positive(config, "radius", std::nullopt);
  const int trunc = get_positive(config, "trunc", 2 * std::min(r, 8));
  const int support = get_positive(config, "support_radius", std::max(1, std::min(r, trunc / 2)));
  const std::string mode = read_mode(config);

  Report rep = make_report("dist", config, tol);
  rep.meta["group"] = group.describe();
  rep.meta["mode"] = mode;
  const Ball ball = enumerate_ball(group, r);
  const auto growth = growth_fit_or_empty(ball);
  const auto row = evaluate_pair(a.state, b.state, group, ball, growth, mode != "bracket", support, trunc, tol);

  rep.columns = {"state_a", "state_b", "d_inf_lo", "d_inf_hi", "d2_lo", "d2_hi", "d_lo", "d_hi",
                 "heuristic", "sigma_drift", "radius", "support_radius", "trunc"};
  const bool show_bracket = mode != "heuristic";
  rep.rows.push_back({a.name, b.name,
                      show_bracket ? num(row.inf.lo) : json(), show_bracket ? num(row.inf.hi) : json(),
                      show_bracket ? num(row.two.lo) : json(), show_bracket ? num(row.two.hi) : json(),
                      show_bracket ? num(row.inf.lo) : json(), show_bracket ? num(row.two.hi) : json(),
                      row.heur ? num(row.heur->estimate) : json(), row.heur ? num(row.heur->sigma_drift) : json(),
                      r, support, trunc});
  if (row.heur) rep.meta["heuristic"] = row.heur->diagnostics;
  rep.meta["d_2"] = row.two.diagnostics;
  for (const auto& f : check_order(row, tol)) rep.failures.push_back(a.name + " vs " + b.name + ": " + f);
  note_warnings(rep, row, a.name + " vs " + b.name);
  return rep;
}

Report run_sandwich(const json& config, const std::string& base_dir) {
  const auto tol = read_tolerances(config);
  const Group group = load_group(config, base_dir);
  const auto states = load_states(config, group, base_dir);
  if (states.empty()) throw ConfigError("states", "at least one state is required");
  const int r = get_positive(config, "radius", std::nullopt);
  const int trunc = get_positive(config, "trunc", 40);
  const int support = get_positive(config, "support_radius", std::max(1, std::min(r, trunc / 2)));
  const std::string mode = read_mode(config);

  Report rep = make_report("sandwich", config, tol);
  rep.meta["group"] = group.describe();
  rep.meta["radius"] = r;
  rep.meta["support_radius"] = support;
  rep.meta["trunc"] = trunc;
  rep.columns = {"state_a", "state_b", "d_inf_lo", "d_inf_hi", "heuristic", "sigma_drift", "d2_lo", "d2_hi",
                 "d2_divergent", "pass"};
  const Ball ball = enumerate_ball(group, r);
  const auto growth = growth_fit_or_empty(ball);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (states.size() == 1) pairs.emplace_back(0, 0);
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t j = i + 1; j < states.size(); ++j) pairs.emplace_back(i, j);

  auto run_pair = [&](const NamedState& a, const NamedState& b) {
    const auto row = evaluate_pair(a.state, b.state, group, ball, growth, mode != "bracket", support, trunc, tol);
    const auto bad = check_order(row, tol);
    rep.rows.push_back({a.name, b.name, num(row.inf.lo), num(row.inf.hi),
                        row.heur ? num(row.heur->estimate) : json(), row.heur ? num(row.heur->sigma_drift) : json(),
                        num(row.two.lo), num(row.two.hi), !row.two.hi_finite(), bad.empty()});
    for (const auto& f : bad) rep.failures.push_back(a.name + " vs " + b.name + ": " + f);
    note_warnings(rep, row, a.name + " vs " + b.name);
  };
  for (auto [i, j] : pairs) run_pair(states[i], states[j]);

  if (config.contains("random_pairs")) {
    // consecutive random states form the extra pairs: (0,1), (2,3), ...
    const auto extra = random_states(config["random_pairs"], group);
    for (std::size_t i = 0; i + 1 < extra.size(); i += 2) run_pair(extra[i], extra[i + 1]);
  }
  return rep;
}

Report run_converge(const json& config, const std::string& base_dir) {
  const auto tol = read_tolerances(config);
  const Group group = load_group(config, base_dir);
  const int r = get_positive(config, "radius", std::nullopt);
  const int n_from = get_positive(config, "n_from", 1);
  const int n_to = get_positive(config, "n_to", std::nullopt);
  if (n_to < n_from) throw ConfigError("n_to", "must be >= n_from");
  const double epsilon = get_number(config, "epsilon", 0.0);
  if (!(epsilon > 0)) throw ConfigError("epsilon", "must be positive");
  const std::string metric = config.value("metric", std::string("d_inf"));
  if (metric != "d_inf" && metric != "d_2") throw ConfigError("metric", "expected 'd_inf' or 'd_2'");
  const std::string bound = config.value("assert_on", std::string("hi"));
  if (bound != "lo" && bound != "hi") throw ConfigError("assert_on", "expected 'lo' or 'hi'");
  if (!config.contains("limit")) throw ConfigError("limit", "missing field");
  const auto limit = load_state(config["limit"], group, base_dir, "limit", 0);
  if (!config.contains("sequence") || !config["sequence"].is_object()) throw ConfigError("sequence", "expected an object");
  const auto& seq = config["sequence"];
  const std::string kind = seq.value("kind", std::string());

  // the n-th member of the sequence
  std::function<StateRep(int)> member;
  if (kind == "character_phase") {
    // z_n = exp(i * scale / n) in every coordinate
    const double scale = get_number(seq, "scale", 1.0, "sequence.");
    member = [&group, scale](int n) {
      return StateRep::character(group, std::vector<cplx>(group.z_rank(), std::polar(1.0, scale / n)));
    };
  } else if (kind == "density_ray") {
    // b_n = base + direction / n
    if (!seq.contains("base") || !seq.contains("direction")) throw ConfigError("sequence", "density_ray needs base and direction");
    const auto base = io::parse_algebra(seq["base"], group, "sequence.base");
    const auto dir = io::parse_algebra(seq["direction"], group, "sequence.direction");
    member = [&group, base, dir](int n) {
      AlgebraElement step = dir;
      step *= 1.0 / n;
      return StateRep::density(group, base + step);
    };
  } else if (kind == "constant") {
    if (!seq.contains("state")) throw ConfigError("sequence.state", "missing field");
    const auto fixed = load_state(seq["state"], group, base_dir, "sequence.state", 0).state;
    member = [fixed](int) { return fixed; };
  } else {
    throw ConfigError("sequence.kind", "expected 'character_phase', 'density_ray' or 'constant'");
  }

  Report rep = make_report("converge", config, tol);
  rep.meta["group"] = group.describe();
  rep.meta["radius"] = r;
  rep.meta["metric"] = metric;
  rep.meta["assert_on"] = bound;
  rep.meta["epsilon"] = epsilon;
  rep.columns = {"n", "d_inf_lo", "d_inf_hi", "d2_lo", "d2_hi"};
  const Ball ball = enumerate_ball(group, r);
  const auto growth = growth_fit_or_empty(ball);

  double prev = std::numeric_limits<double>::infinity(), last = 0;
  for (int n = n_from; n <= n_to; ++n) {
    StateRep s = [&] {
      try {
        return member(n);
      } catch (const DomainError& e) {
        throw ConfigError("sequence", e.what());
      }
    }();
    const auto inf = d_inf(s, limit.state, ball);
    const auto two = d_2(s, limit.state, ball, growth);
    rep.rows.push_back({n, num(inf.lo), num(inf.hi), num(two.lo), num(two.hi)});
    rep.curves["d_inf_lo"].emplace_back(n, inf.lo);
    rep.curves["d2_lo"].emplace_back(n, two.lo);
    const MetricBracket& m = metric == "d_inf" ? inf : two;
    const double v = bound == "lo" ? m.lo : m.hi;
    if (v > prev + tol.monotone)
      rep.failures.push_back(metric + "." + bound + " increased at n=" + std::to_string(n));
    prev = v;
    last = v;
  }
  if (!(last < epsilon))
    rep.failures.push_back("final " + metric + "." + bound + " = " + std::to_string(last) + " is not below epsilon " +
                           std::to_string(epsilon));
  return rep;
}

Report run_kappa(const json& config, const std::string& base_dir) {
  const auto tol = read_tolerances(config);
  const Group group = load_group(config, base_dir);
  const auto states = load_states(config, group, base_dir);
  if (states.empty()) throw ConfigError("states", "at least one density state is required");
  const int r = get_positive(config, "radius", std::nullopt);
  const int trunc = get_positive(config, "trunc", 40);

  Report rep = make_report("kappa", config, tol);
  rep.meta["group"] = group.describe();
  rep.meta["radius"] = r;
  rep.meta["trunc"] = trunc;
  rep.columns = {"row", "state_a", "state_b", "kappa_lower", "kappa_upper", "sum_sq_coeffs", "d2_lo", "d2_hi",
                 "bound", "pass"};
  const Ball ball = enumerate_ball(group, r);
  const Ball tball = enumerate_ball(group, trunc);
  const auto growth = growth_fit_or_empty(ball);
  const NormOptions nopts{tol.norm_tol, tol.norm_max_iter};

  std::vector<KappaBound> kappas;
  for (const auto& s : states) {
    const auto* d = std::get_if<DensityState>(&s.state.variant());
    if (!d) throw ConfigError("states", "kappa experiment needs density states, got " + std::string(s.state.kind()));
    const auto kb = kappa_bounds(s.state, tball, nopts);
    kappas.push_back(kb);
    // phi(lambda_g) = rho(g^{-1}), so the coefficients vanish off the inverse support of rho
    double sum_sq = 0;
    for (const auto& [g, x] : d->rho.terms()) sum_sq += std::norm(s.state.coeff(group.inv(g), group));
    const bool ok = kb.kappa_upper >= 1.0 - tol.order && kb.kappa_lower <= kb.kappa_upper + tol.order &&
                    sum_sq <= kb.kappa_upper + tol.order;
    rep.rows.push_back({"state", s.name, json(), kb.kappa_lower, kb.kappa_upper, sum_sq, json(), json(), kb.kappa_upper, ok});
    if (!ok) rep.failures.push_back(s.name + ": kappa interval or l2 bound violated");
  }

  double kappa_max = 0;
  for (const auto& kb : kappas) kappa_max = std::max(kappa_max, kb.kappa_upper);
  rep.meta["kappa_max"] = kappa_max;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      const auto two = d_2(states[i].state, states[j].state, ball, growth);
      const double cap = 2.0 * std::max(kappas[i].kappa_upper, kappas[j].kappa_upper);
      const bool ok = two.hi_finite() && two.hi <= cap + tol.order;
      rep.rows.push_back({"pair", states[i].name, states[j].name, json(), json(), json(), num(two.lo), num(two.hi), cap, ok});
      if (!ok) rep.failures.push_back(states[i].name + " vs " + states[j].name + ": d_2.hi exceeds 2 kappa");
    }
  }
  return rep;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"ball", "growth", "summable", "dist", "sandwich", "converge", "kappa"};
  return names;
}

Report run_experiment(const std::string& name, const json& config, const std::string& base_dir) {
  if (!config.is_object()) throw ConfigError("", "config must be a JSON object");
  if (name == "ball") return run_ball(config, base_dir);
  if (name == "growth") return run_growth(config, base_dir);
  if (name == "summable") return run_summable(config, base_dir);
  if (name == "dist") return run_dist(config, base_dir);
  if (name == "sandwich") return run_sandwich(config, base_dir);
  if (name == "converge") return run_converge(config, base_dir);
  if (name == "kappa") return run_kappa(config, base_dir);
  throw ConfigError("experiment", "unknown experiment '" + name + "'");
}

}  // namespace qmetric
