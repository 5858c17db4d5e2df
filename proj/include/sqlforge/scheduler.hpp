#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sqlforge/operators.hpp"

namespace sqlforge {

struct EvolutionState {
  std::array<long long, 6> counts{};  // accepted children per operator, indexed by OperatorId
  long long n_total = 0;
  std::array<double, 6> p_target{1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6};
  double epsilon = 0.01;
  int round = 0;
  int budget = 2;  // K

  long long count(OperatorId op) const { return counts[static_cast<std::size_t>(op)]; }
  double target(OperatorId op) const { return p_target[static_cast<std::size_t>(op)]; }
  bool operator==(const EvolutionState&) const = default;
};

std::vector<std::string> state_violations(const EvolutionState& state);
// Throws ValidationError listing every violation.
void validate_state(const EvolutionState& state);

// P_target(op) / (C(op) / (N_total + eps) + eps).
double scarcity_weight(const EvolutionState& state, OperatorId op);

// Throws DomainError when s_feas is outside [0, 1].
double utility(double s_feas, double w_div);

// Highest utilities first, ties in enumeration order; zero utilities never selected.
// Throws PreconditionError when k < 1.
std::vector<OperatorId> select_top_k(const std::map<OperatorId, double>& utilities, int k);

EvolutionState record_acceptance(EvolutionState state, OperatorId op);

// Rule-based feasibility gates an optional model score: structurally impossible
// operators stay at zero whatever the model says.
double combine_feasibility(double rule_score, std::optional<double> model_score);

std::string state_to_json(const EvolutionState& state);
// Throws ValidationError for malformed or invalid documents.
EvolutionState state_from_json(const std::string& text);
void save_state(const std::filesystem::path& file, const EvolutionState& state);
EvolutionState load_state(const std::filesystem::path& file);

// EvolutionState shared by the workers of one round.
class SharedEvolutionState {
 public:
  explicit SharedEvolutionState(EvolutionState initial) : state_(std::move(initial)) {}
  EvolutionState snapshot() const {
    std::lock_guard lock(mutex_);
    return state_;
  }
  void record(OperatorId op) {
    std::lock_guard lock(mutex_);
    state_ = record_acceptance(std::move(state_), op);
  }
  double weight(OperatorId op) const {
    std::lock_guard lock(mutex_);
    return scarcity_weight(state_, op);
  }

 private:
  mutable std::mutex mutex_;
  EvolutionState state_;
};

}  // namespace sqlforge
