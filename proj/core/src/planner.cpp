#include "cfrisk/planner.hpp"

#include "cfrisk/errors.hpp"

#include <algorithm>

namespace cfrisk
{

const char * to_string(SelectionReason r)
{
  switch (r) {
    case SelectionReason::max_progress_among_safe: return "max_progress_among_safe";
    case SelectionReason::max_min_ttc_all_unsafe: return "max_min_ttc_all_unsafe";
  }
  return "max_progress_among_safe";
}

std::array<CounterfactualOutcome, 9> evaluate_tree(
  const ObservationWindow & window, const PlannerConfig & cfg)
{
  const AgentState & ego = window.ego_state();
  const auto predictions = predict_neighbors(window, cfg);

  std::vector<PosedTrack> neighbor_tracks;
  neighbor_tracks.reserve(predictions.size());
  for (const auto & pred : predictions) {
    neighbor_tracks.push_back(PosedTrack::from_prediction(pred, window.analysis_time));
  }

  std::array<CounterfactualOutcome, 9> outcomes;
  const auto actions = enumerate_meta_actions();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    CounterfactualOutcome & out = outcomes[i];
    out.action = actions[i];
    out.rollout = rollout(ego, to_accel_profile(actions[i], cfg), cfg);
    out.rollout.meta_action = actions[i];
    out.progress = out.rollout.progress();

    const RolloutTtc ttc = rollout_min_ttc(out.rollout, predictions, cfg);
    out.min_ttc = ttc.min_ttc;

    const PosedTrack ego_track = PosedTrack::from_rollout(out.rollout);
    out.contact_offset.reset();
    for (const auto & neighbor : neighbor_tracks) {
      const auto contact = trajectories_collide(ego_track, neighbor);
      if (contact && (!out.contact_offset || *contact < *out.contact_offset)) {
        out.contact_offset = contact;
      }
    }

    const bool unsafe = out.min_ttc < cfg.ttc_threshold || out.contact_offset.has_value();
    out.label = unsafe ? SafetyLabel::unsafe : SafetyLabel::safe;
  }
  return outcomes;
}

std::pair<MetaAction, SelectionReason> select_action(
  const std::vector<CounterfactualOutcome> & outcomes, const PlannerConfig & cfg)
{
  (void)cfg;
  if (outcomes.size() != 9) {
    throw StructuralError(
      "select_action: expected 9 outcomes, got " + std::to_string(outcomes.size()));
  }

  const bool any_safe = std::any_of(
    outcomes.begin(), outcomes.end(),
    [](const CounterfactualOutcome & o) { return o.label == SafetyLabel::safe; });

  const CounterfactualOutcome * best = nullptr;
  if (any_safe) {
    for (const auto & o : outcomes) {
      if (o.label != SafetyLabel::safe) {
        continue;
      }
      const bool better =
        best == nullptr || o.progress > best->progress ||
        (o.progress == best->progress &&
         o.action.canonical_index() < best->action.canonical_index());
      if (better) {
        best = &o;
      }
    }
    return {best->action, SelectionReason::max_progress_among_safe};
  }

  for (const auto & o : outcomes) {
    if (best == nullptr) {
      best = &o;
      continue;
    }
    const bool o_contact = o.contact_offset.has_value();
    const bool b_contact = best->contact_offset.has_value();
    bool better = false;
    if (o_contact != b_contact) {
      better = b_contact;  // contact-free beats contact
    } else if (o.min_ttc != best->min_ttc) {
      better = o.min_ttc > best->min_ttc;
    } else {
      better = o.action.canonical_index() < best->action.canonical_index();
    }
    if (better) {
      best = &o;
    }
  }
  return {best->action, SelectionReason::max_min_ttc_all_unsafe};
}

PlanResult plan(const ObservationWindow & window, const PlannerConfig & cfg)
{
  PlanResult result;
  result.outcomes = evaluate_tree(window, cfg);

  std::vector<CounterfactualOutcome> as_vector(result.outcomes.begin(), result.outcomes.end());
  const auto [selected, reason] = select_action(as_vector, cfg);
  result.selected = selected;
  result.selection_reason = reason;
  for (const auto & o : result.outcomes) {
    if (o.action == selected) {
      result.planned_trajectory = o.rollout;
      break;
    }
  }
  return result;
}

}  // namespace cfrisk
