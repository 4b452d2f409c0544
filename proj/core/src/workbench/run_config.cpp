#include "adjqoc/workbench/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace adjqoc::workbench {

using nlohmann::json;

std::string_view to_string(OptimizerKind k) {
  return k == OptimizerKind::kNewton ? "newton" : "bfgs";
}

OptimizerKind optimizer_from_string(std::string_view s) {
  if (s == "newton") return OptimizerKind::kNewton;
  if (s == "bfgs") return OptimizerKind::kBfgs;
  throw std::invalid_argument("unknown optimizer '" + std::string(s) +
                              "' (expected newton or bfgs)");
}

std::string_view to_string(SubproblemSolver s) {
  return s == SubproblemSolver::kExact ? "exact" : "steihaug";
}

SubproblemSolver subproblem_from_string(std::string_view s) {
  if (s == "exact") return SubproblemSolver::kExact;
  if (s == "steihaug") return SubproblemSolver::kSteihaug;
  throw std::invalid_argument("unknown subproblem solver '" + std::string(s) +
                              "' (expected exact or steihaug)");
}

void RunConfig::validate() const {
  if (!(rho >= 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("config: rho must be finite and >= 0");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("config: dt must be finite and > 0");
  }
  if (steps < 1) throw std::invalid_argument("config: J must be >= 1");
  const auto names = registered_models();
  if (std::find(names.begin(), names.end(), model) == names.end()) {
    throw std::invalid_argument("config: unknown model '" + model + "'");
  }
  if (model_pulses < 1) throw std::invalid_argument("config: model_pulses must be >= 1");
  criteria.validate();
  if (!(initial_radius > 0.0) || !std::isfinite(initial_radius)) {
    throw std::invalid_argument("config: initial_radius must be > 0");
  }
  if (memory_budget == 0) throw std::invalid_argument("config: memory_budget must be > 0");
}

AdjointOptions RunConfig::adjoint_options() const {
  AdjointOptions o;
  o.batch_width = batch_width;
  o.workers = workers;
  o.memory_budget = memory_budget;
  return o;
}

TrustRegionConfig RunConfig::trust_region() const {
  TrustRegionConfig t;
  t.initial_radius = initial_radius;
  t.max_radius = std::max(t.max_radius, initial_radius);
  t.subproblem = subproblem;
  return t;
}

ModelOptions RunConfig::model_options() const {
  ModelOptions o;
  o.pulses = model_pulses;
  return o;
}

bool RunConfig::operator==(const RunConfig& o) const {
  return rho == o.rho && dt == o.dt && steps == o.steps && model == o.model &&
         model_pulses == o.model_pulses && optimizer == o.optimizer &&
         seed == o.seed && criteria.step_tol == o.criteria.step_tol &&
         criteria.grad_tol == o.criteria.grad_tol &&
         criteria.max_iters == o.criteria.max_iters &&
         initial_radius == o.initial_radius && subproblem == o.subproblem &&
         batch_width == o.batch_width && memory_budget == o.memory_budget &&
         workers == o.workers;
}

std::string dump_config(const RunConfig& c) {
  json j;
  j["rho"] = c.rho;
  j["dt"] = c.dt;
  j["J"] = c.steps;
  j["model"] = c.model;
  j["model_pulses"] = c.model_pulses;
  j["optimizer"] = to_string(c.optimizer);
  j["seed"] = c.seed;
  j["criteria"] = {{"step_tol", c.criteria.step_tol},
                   {"grad_tol", c.criteria.grad_tol},
                   {"max_iters", c.criteria.max_iters}};
  j["trust_region"] = {{"initial_radius", c.initial_radius},
                       {"subproblem", to_string(c.subproblem)}};
  j["batch_width"] = c.batch_width;
  j["memory_budget"] = c.memory_budget;
  j["workers"] = c.workers;
  return j.dump(2) + "\n";
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw std::invalid_argument("config: unknown key '" + where + key + "'");
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <class T>
void read_count(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_unsigned()) {
    throw std::invalid_argument(std::string("config: '") + key +
                                "' must be a nonnegative integer");
  }
  out = v.get<T>();
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: expected an object");
  reject_unknown(j,
                 {"rho", "dt", "J", "model", "model_pulses", "optimizer", "seed",
                  "criteria", "trust_region", "batch_width", "memory_budget",
                  "workers"},
                 "");
  RunConfig c;
  try {
    read(j, "rho", c.rho);
    read(j, "dt", c.dt);
    read_count(j, "J", c.steps);
    read(j, "model", c.model);
    read(j, "model_pulses", c.model_pulses);
    if (j.contains("optimizer")) {
      c.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
    }
    read_count(j, "seed", c.seed);
    if (j.contains("criteria")) {
      const json& cr = j.at("criteria");
      reject_unknown(cr, {"step_tol", "grad_tol", "max_iters"}, "criteria.");
      read(cr, "step_tol", c.criteria.step_tol);
      read(cr, "grad_tol", c.criteria.grad_tol);
      read_count(cr, "max_iters", c.criteria.max_iters);
    }
    if (j.contains("trust_region")) {
      const json& tr = j.at("trust_region");
      reject_unknown(tr, {"initial_radius", "subproblem"}, "trust_region.");
      read(tr, "initial_radius", c.initial_radius);
      if (tr.contains("subproblem")) {
        c.subproblem = subproblem_from_string(tr.at("subproblem").get<std::string>());
      }
    }
    read_count(j, "batch_width", c.batch_width);
    read_count(j, "memory_budget", c.memory_budget);
    read_count(j, "workers", c.workers);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << dump_config(cfg);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace adjqoc::workbench
