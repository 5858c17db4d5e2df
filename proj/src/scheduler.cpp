#include "sqlforge/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sqlforge/error.hpp"

namespace sqlforge {

std::vector<std::string> state_violations(const EvolutionState& s) {
  std::vector<std::string> out;
  double sum = std::accumulate(s.p_target.begin(), s.p_target.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) out.push_back("target probabilities sum to " + std::to_string(sum) + ", not 1");
  for (OperatorId op : kOperators) {
    if (s.count(op) < 0) out.push_back("negative count for " + std::string(operator_code(op)));
    if (s.target(op) < 0) out.push_back("negative target probability for " + std::string(operator_code(op)));
  }
  if (std::accumulate(s.counts.begin(), s.counts.end(), 0LL) != s.n_total)
    out.push_back("n_total does not equal the sum of counts");
  if (!(s.epsilon > 0)) out.push_back("epsilon must be positive");
  if (s.budget < 1) out.push_back("budget K must be at least 1");
  if (s.round < 0) out.push_back("round must be non-negative");
  return out;
}

void validate_state(const EvolutionState& state) {
  auto v = state_violations(state);
  if (!v.empty()) throw ValidationError(std::move(v));
}

double scarcity_weight(const EvolutionState& state, OperatorId op) {
  // P_accum is already smoothed; the weight adds eps a second time.
  double accumulated = static_cast<double>(state.count(op)) / (static_cast<double>(state.n_total) + state.epsilon);
  return state.target(op) / (accumulated + state.epsilon);
}

double utility(double s_feas, double w_div) {
  if (!(s_feas >= 0.0 && s_feas <= 1.0)) throw DomainError("feasibility score must lie in [0, 1]");
  return s_feas * w_div;
}

std::vector<OperatorId> select_top_k(const std::map<OperatorId, double>& utilities, int k) {
  if (k < 1) throw PreconditionError("k must be at least 1");
  std::vector<std::pair<OperatorId, double>> ranked;
  for (OperatorId op : kOperators) {
    auto it = utilities.find(op);
    if (it != utilities.end() && it->second > 0) ranked.emplace_back(op, it->second);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<OperatorId> out;
  for (const auto& [op, u] : ranked) {
    if (static_cast<int>(out.size()) == k) break;
    out.push_back(op);
  }
  return out;
}

EvolutionState record_acceptance(EvolutionState state, OperatorId op) {
  ++state.counts[static_cast<std::size_t>(op)];
  ++state.n_total;
  return state;
}

double combine_feasibility(double rule_score, std::optional<double> model_score) {
  if (!model_score) return rule_score;
  return rule_score > 0 ? *model_score : 0.0;
}

std::string state_to_json(const EvolutionState& s) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  nlohmann::ordered_json target = nlohmann::ordered_json::object();
  for (OperatorId op : kOperators) {
    counts[std::string(operator_code(op))] = s.count(op);
    target[std::string(operator_code(op))] = s.target(op);
  }
  j["counts"] = counts;
  j["n_total"] = s.n_total;
  j["p_target"] = target;
  j["epsilon"] = s.epsilon;
  j["round"] = s.round;
  j["budget"] = s.budget;
  return j.dump(2);
}

EvolutionState state_from_json(const std::string& text) {
  EvolutionState s;
  try {
    auto j = nlohmann::json::parse(text);
    for (OperatorId op : kOperators) {
      std::string code(operator_code(op));
      s.counts[static_cast<std::size_t>(op)] = j.at("counts").value(code, 0LL);
      if (j.contains("p_target")) s.p_target[static_cast<std::size_t>(op)] = j.at("p_target").at(code).get<double>();
    }
    s.n_total = j.at("n_total").get<long long>();
    s.epsilon = j.value("epsilon", s.epsilon);
    s.round = j.value("round", 0);
    s.budget = j.value("budget", s.budget);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError({std::string("malformed scheduler state: ") + e.what()});
  }
  validate_state(s);
  return s;
}

void save_state(const std::filesystem::path& file, const EvolutionState& state) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << state_to_json(state) << '\n';
}

EvolutionState load_state(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return state_from_json(buf.str());
}

}  // namespace sqlforge
