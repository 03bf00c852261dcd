// Command-line front end for the pandora library.
//
// Exit codes: 0 success, 2 invalid input, 3 unsupported constraint or size
// cap, 4 internal invariant violation.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pandora/pandora.hpp"

namespace {

using nlohmann::ordered_json;
using namespace pandora;

enum ExitCode { kOk = 0, kInvalid = 2, kUnsupported = 3, kInvariant = 4 };

struct Options {
  std::string input;
  bool json = false;
  std::optional<std::uint64_t> seed;
  std::uint64_t trials = 10000;
  std::string epsilon;
  std::string delta = "1/10";
  std::string p = "1/10";
  std::optional<std::size_t> n;
  std::vector<std::int64_t> capacity;
  std::string set;
  std::string policy;
  std::optional<std::uint64_t> samples;
  std::string output;
  std::string name;
};

/// Ordered key-value report printed as `key=value` lines or one JSON object.
class Report {
 public:
  void add(const std::string& key, ordered_json value, std::string text) {
    json_[key] = std::move(value);
    text_ += key + "=" + text + "\n";
  }
  void add(const std::string& key, const Rational& r) { add(key, to_string(r), to_string(r)); }
  void add(const std::string& key, const std::string& s) { add(key, s, s); }
  void add(const std::string& key, const char* s) { add(key, std::string(s)); }
  void add(const std::string& key, bool b) { add(key, b, b ? "true" : "false"); }
  void add(const std::string& key, std::uint64_t v) { add(key, v, std::to_string(v)); }
  void add(const std::string& key, double v) { add(key, v, format_double(v)); }
  void add_list(const std::string& key, const std::vector<std::string>& items) {
    std::string joined;
    for (const auto& s : items) joined += (joined.empty() ? "" : " ") + s;
    add(key, ordered_json(items), joined);
  }
  void prepend_text(std::string block) { text_ = std::move(block) + text_; }
  ordered_json& json() { return json_; }

  void print(bool as_json) const {
    if (as_json)
      std::cout << json_.dump(2) << "\n";
    else
      std::cout << text_;
  }

 private:
  ordered_json json_ = ordered_json::object();
  std::string text_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Loads --input and applies --capacity: replaces the side capacities, or
/// adds a cardinality constraint when the instance has none.
Instance load(const Options& o) {
  if (o.input.empty()) throw ValidationError("--input is required");
  auto inst = load_instance(read_file(o.input));
  if (o.capacity.empty()) return inst;
  SideConstraint side = inst.side();
  switch (side.kind) {
    case SideKind::knapsack:
      side.capacity = o.capacity;
      break;
    case SideKind::partition:
      side.capacities = o.capacity;
      break;
    case SideKind::none:
      if (o.capacity.size() != 1) throw ValidationError("--capacity on an unconstrained instance takes one value");
      side.kind = SideKind::knapsack;
      side.capacity = o.capacity;
      for (const auto& b : inst.boxes()) side.weights[b.id] = {1};
      break;
  }
  return inst.with_side(std::move(side));
}

std::uint64_t require_seed(const Options& o) {
  if (!o.seed) throw ValidationError("this command is randomized; pass --seed");
  return *o.seed;
}

Rational rational_flag(const std::string& text, const char* flag) {
  if (text.empty()) throw ValidationError(std::string(flag) + " is required");
  return parse_rational(text);
}

std::vector<std::string> split_ids(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

/// Policy file: {"thresholds": {"id": "rational", ...}}.
ThresholdPolicy load_policy(const Instance& inst, const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid policy JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("thresholds") || !doc["thresholds"].is_object())
    throw ParseError("policy document needs a 'thresholds' object");
  std::map<std::string, Rational> by_name;
  for (const auto& [id, v] : doc["thresholds"].items()) {
    if (!v.is_string() && !v.is_number_integer()) throw ParseError("threshold of '" + id + "' must be a rational");
    if (!inst.contains(id)) throw ValidationError("policy names unknown box '" + id + "'");
    by_name[id] = v.is_string() ? parse_rational(v.get<std::string>()) : Rational(v.get<std::int64_t>());
  }
  return ThresholdPolicy::from_map(inst, by_name);
}

ThresholdPolicy policy_for(const Instance& inst, const Options& o) {
  if (!o.policy.empty()) return load_policy(inst, o.policy);
  return ThresholdPolicy::from_tree(solve_tree(inst));
}

std::vector<std::string> ids_of(const Instance& inst, std::span<const std::size_t> indices) {
  std::vector<std::string> out;
  for (auto i : indices) out.push_back(inst.box(i).id);
  return out;
}

std::string action_name(const Instance& inst, std::size_t a) {
  return a == ExactSolver::kStop ? "stop" : inst.box(a).id;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
}

// ---- commands --------------------------------------------------------------

void cmd_solve(const Options& o) {
  auto inst = load(o);
  if (inst.kind() == ConstraintKind::dag)
    throw UnsupportedError("DAG constraints have no threshold solution; use the 'oracle' command");
  auto sol = solve_tree(inst);
  Report r;
  std::string table = "box threshold\n";
  ordered_json thresholds = ordered_json::object();
  for (auto i : sol.order_indices) {
    table += inst.box(i).id + " " + to_string(sol.thresholds[i]) + "\n";
    thresholds[inst.box(i).id] = to_string(sol.thresholds[i]);
  }
  r.prepend_text(table);
  r.json()["thresholds"] = thresholds;
  r.add_list("order", ids_of(inst, sol.order_indices));
  r.add("value", sol.value);
  r.print(o.json);
}

void cmd_evaluate(const Options& o) {
  auto inst = load(o);
  Report r;
  if (!o.set.empty()) {
    if (!o.policy.empty()) throw ValidationError("pass either --set or --policy, not both");
    auto ids = split_ids(o.set);
    r.add_list("set", ids);
    r.add("value", evaluate_set(inst, ids));
  } else {
    auto policy = policy_for(inst, o);
    r.add_list("order", ids_of(inst, exploration_order(inst, policy)));
    r.add("value", evaluate_threshold_exact(inst, policy));
  }
  r.print(o.json);
}

void cmd_simulate(const Options& o) {
  auto seed = require_seed(o);
  auto inst = load(o);
  auto policy = policy_for(inst, o);
  auto s = simulate(inst, policy, o.trials, seed);
  Report r;
  r.add("mean", s.mean);
  r.add("stddev", s.stddev);
  r.add("trials", s.trials);
  r.add("seed", s.seed);
  r.print(o.json);
}

void cmd_oracle(const Options& o) {
  auto inst = load(o);
  auto opt = solve_exact(inst);
  Report r;
  r.add("value", opt.value);
  r.add("e_max", opt.e_max);
  r.add("e_cost", opt.e_cost);
  r.add("first_action", action_name(inst, opt.action(0, Rational(0))));
  r.add("states", static_cast<std::uint64_t>(opt.solver->states_visited()));
  r.print(o.json);
}

void cmd_fixed_order(const Options& o) {
  auto inst = load(o);
  auto fixed = best_fixed_order(inst);
  Report r;
  r.add_list("order", ids_of(inst, fixed.order));
  r.add("value", fixed.value);
  r.print(o.json);
}

void cmd_approx(const Options& o) {
  auto inst = load(o);
  auto policy = solve_approx(inst);
  Report r;
  r.add("psi", policy.value());
  r.add("value", evaluate_approx_exact(inst, policy));
  if (inst.size() <= kMaxSetEnumerationBoxes) {
    auto g = verify_guarantee(inst, policy);
    r.add("feasible_sets", static_cast<std::uint64_t>(g.feasible_sets));
    r.add("set_margin", g.set_margin);
    if (g.guarantee_margin) {
      r.add("e_max", *g.e_max);
      r.add("e_cost", *g.e_cost);
      r.add("guarantee_margin", *g.guarantee_margin);
    }
  }
  if (o.seed) {
    auto t = run_approx(inst, policy, *o.seed);
    r.add_list("trajectory", ids_of(inst, t.final.opened));
    r.add("revenue", t.revenue());
  }
  r.print(o.json);
}

void cmd_learn(const Options& o) {
  auto seed = require_seed(o);
  auto inst = load(o);
  auto eps = rational_flag(o.epsilon.empty() ? "1/10" : o.epsilon, "--epsilon");
  auto delta = rational_flag(o.delta, "--delta");
  std::uint64_t n = o.samples ? *o.samples
                              : sample_bound(inst.size(), to_double(eps), to_double(delta), SampleMode::tree);
  auto config = LearningConfig::make(eps, delta, n);
  auto learned = learn_and_solve(inst, config, seed);
  Report r;
  r.add("true_opt", learned.report.true_opt);
  r.add("learned_policy_value", learned.report.learned_policy_value);
  r.add("gap", learned.report.gap);
  r.add("epsilon", learned.report.epsilon);
  r.add("N", learned.report.samples);
  r.print(o.json);
}

void cmd_example(const Options& o) {
  Report r;
  std::optional<Instance> inst;
  r.add("name", o.name);
  if (o.name == "figure1") {
    auto eps = rational_flag(o.epsilon.empty() ? "3/2" : o.epsilon, "--epsilon");
    inst = builtin::figure1(eps);
    auto c = builtin::check_figure1(*inst);
    r.add("epsilon", eps);
    r.add("oracle_value", c.oracle_value);
    r.add_list("best_fixed_order", ids_of(*inst, c.fixed_order));
    r.add("fixed_order_value", c.fixed_order_value);
    r.add("gap", Rational(c.oracle_value - c.fixed_order_value));
    r.add("opens_a_first", c.opens_a_first);
    r.add("second_if_xa_high", action_name(*inst, c.second_if_high));
    r.add("second_if_xa_low", action_name(*inst, c.second_if_low));
    r.add("adaptive_order", c.adaptive_order());
    r.add("fixed_order_suboptimal", c.fixed_order_suboptimal());
  } else if (o.name == "adaptivity-gap") {
    auto p = rational_flag(o.p, "--p");
    if (!(p > 0 && p <= Rational(1, 2))) throw ValidationError("--p must lie in (0, 1/2]");
    auto n = o.n ? *o.n : builtin::adaptivity_gap_default_n(p);
    if (n == 0) throw ValidationError("--n must be positive");
    inst = builtin::adaptivity_gap(p, n);
    auto c = builtin::check_adaptivity_gap(p, n);
    r.add("p", p);
    r.add("n", static_cast<std::uint64_t>(n));
    r.add("adaptive_value", c.adaptive_value);
    r.add("adaptive_value_approx", to_double(c.adaptive_value));
    r.add("best_fixed_set_size", static_cast<std::uint64_t>(c.best_k));
    r.add("best_fixed_set_value", c.best_fixed_set_value);
    r.add("best_fixed_set_value_approx", to_double(c.best_fixed_set_value));
    r.add("ratio", c.ratio);
  } else if (o.name == "guard-line") {
    inst = builtin::guard_line();
    auto sol = solve_line(line_of(*inst));
    std::vector<std::string> z;
    for (const auto& t : sol.thresholds.z) z.push_back(to_string(t));
    r.add_list("thresholds", z);
    r.add("value", sol.table.value());
  } else {
    throw ValidationError("unknown example '" + o.name + "' (expected figure1, adaptivity-gap or guard-line)");
  }
  if (!o.output.empty()) {
    write_text_file(o.output, dump_instance(*inst));
    r.add("written", o.output);
  }
  r.json()["instance"] = ordered_json::parse(instance_to_json(*inst).dump());
  r.print(o.json);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pandora's box with order constraints: exact solvers, policies and checks"};
  app.require_subcommand(1, 1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool needs_input) {
    if (needs_input) sub->add_option("--input", o.input, "Instance document (JSON)")->required();
    sub->add_flag("--json", o.json, "Emit JSON instead of key=value text");
    sub->add_option("--capacity", o.capacity, "Side-constraint capacities");
  };

  auto* solve = app.add_subcommand("solve", "Thresholds, linear order and optimal value of a tree/forest/line");
  add_common(solve, true);

  auto* evaluate = app.add_subcommand("evaluate", "Exact value of a fixed set or a threshold policy");
  add_common(evaluate, true);
  evaluate->add_option("--set", o.set, "Comma-separated box ids opened unconditionally");
  evaluate->add_option("--policy", o.policy, "Policy document {\"thresholds\": {...}}");

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo estimate of a threshold policy");
  add_common(sim, true);
  sim->add_option("--seed", o.seed, "Random seed");
  sim->add_option("--trials", o.trials, "Number of trials")->check(CLI::PositiveNumber);
  sim->add_option("--policy", o.policy, "Policy document (default: optimal tree policy)");

  auto* oracle = app.add_subcommand("oracle", "Exhaustive optimal policy for any constraint");
  add_common(oracle, true);

  auto* fixed = app.add_subcommand("fixed-order", "Best single exploration order with optimal stopping");
  add_common(fixed, true);

  auto* approx = app.add_subcommand("approx", "Approximate policy under tree plus knapsack constraints");
  add_common(approx, true);
  approx->add_option("--seed", o.seed, "Also run one sampled trajectory");

  auto* learn = app.add_subcommand("learn", "Learn distributions from samples, solve and evaluate");
  add_common(learn, true);
  learn->add_option("--seed", o.seed, "Random seed");
  learn->add_option("--epsilon", o.epsilon, "Accuracy and grid step (default 1/10)");
  learn->add_option("--delta", o.delta, "Failure probability (default 1/10)");
  learn->add_option("--samples", o.samples, "Samples per box (default: tree sample bound)");

  auto* example = app.add_subcommand("example", "Built-in instances with their checks");
  example->add_option("name", o.name, "figure1, adaptivity-gap or guard-line")->required();
  example->add_flag("--json", o.json, "Emit JSON instead of key=value text");
  example->add_option("--epsilon", o.epsilon, "figure1 parameter (default 3/2)");
  example->add_option("--p", o.p, "adaptivity-gap success parameter (default 1/10)");
  example->add_option("--n", o.n, "adaptivity-gap box count (default ceil(5/p^2))");
  example->add_option("--output", o.output, "Write the instance document here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (*solve) cmd_solve(o);
    else if (*evaluate) cmd_evaluate(o);
    else if (*sim) cmd_simulate(o);
    else if (*oracle) cmd_oracle(o);
    else if (*fixed) cmd_fixed_order(o);
    else if (*approx) cmd_approx(o);
    else if (*learn) cmd_learn(o);
    else if (*example) cmd_example(o);
    return kOk;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return kUnsupported;
  } catch (const CapExceededError& e) {
    std::cerr << "cap exceeded: " << e.what() << "\n";
    return kUnsupported;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInvariant;
  }
}
