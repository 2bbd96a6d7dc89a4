#ifndef CFRISK__PLANNER_HPP_
#define CFRISK__PLANNER_HPP_

#include "cfrisk/kinematics.hpp"
#include "cfrisk/risk.hpp"
#include "cfrisk/scenario.hpp"

#include <array>
#include <optional>
#include <utility>
#include <vector>

namespace cfrisk
{

/// The simulated safety result of executing one meta-action from the
/// current observation.
struct CounterfactualOutcome
{
  MetaAction action;
  EgoRollout rollout;
  double min_ttc{kInfiniteTtc};
  std::optional<double> contact_offset;  // [s] earliest rectangle contact
  SafetyLabel label{SafetyLabel::safe};
  double progress{0.0};  // [m] displacement over [0, T_p]
};

enum class SelectionReason { max_progress_among_safe, max_min_ttc_all_unsafe };

const char * to_string(SelectionReason r);

struct PlanResult
{
  std::array<CounterfactualOutcome, 9> outcomes;  // canonical order
  MetaAction selected;
  EgoRollout planned_trajectory;
  SelectionReason selection_reason{SelectionReason::max_progress_among_safe};
};

/// Evaluate all nine branches of the action tree: roll the ego out under
/// each profile against constant-velocity neighbor predictions and label
/// each branch Unsafe when its minimum TTC drops below the threshold or
/// physical contact occurs. Deterministic and order-stable.
std::array<CounterfactualOutcome, 9> evaluate_tree(
  const ObservationWindow & window, const PlannerConfig & cfg);

/// Branch selection: among Safe outcomes the one with maximum progress;
/// if none is Safe, the outcome with maximum min TTC, with contact
/// outcomes ranked below every contact-free one. Ties break in canonical
/// action order. Throws StructuralError unless given exactly 9 outcomes.
std::pair<MetaAction, SelectionReason> select_action(
  const std::vector<CounterfactualOutcome> & outcomes, const PlannerConfig & cfg);

/// evaluate_tree + select_action; the planned trajectory is the selected
/// branch rollout.
PlanResult plan(const ObservationWindow & window, const PlannerConfig & cfg);

}  // namespace cfrisk

#endif  // CFRISK__PLANNER_HPP_
