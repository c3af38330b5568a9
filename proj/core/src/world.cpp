#include <sstream>

#include "invplan/dynamics.hpp"

namespace invplan {

std::vector<int> valid_action_ids(const GroundedEnvironment& env,
                                  const WorldState& s) {
  std::vector<int> out;
  for (const auto& a : env.actions()) {
    if (env.eval_bool(a.precondition, s)) out.push_back(a.id);
  }
  return out;
}

std::vector<GroundAction> valid_actions(const GroundedEnvironment& env,
                                        const WorldState& s) {
  std::vector<GroundAction> out;
  for (int id : valid_action_ids(env, s)) out.push_back(env.actions()[id]);
  return out;
}

bool action_valid(const GroundedEnvironment& env, const WorldState& s,
                  const GroundAction& a) {
  return env.eval_bool(a.precondition, s);
}

namespace {

void apply_effects(const GroundedEnvironment& env, const WorldState& pre,
                   WorldState& post, const std::vector<CEffect>& effects) {
  for (const auto& e : effects) {
    switch (e.kind) {
      case CEffect::Kind::SetBool:
        post.bools[e.index] = e.truth ? 1 : 0;
        break;
      case CEffect::Kind::Assign:
        post.ints[e.index] = env.eval_int(e.value, pre);
        break;
      case CEffect::Kind::Increase:
        post.ints[e.index] = pre.ints[e.index] + env.eval_int(e.value, pre);
        break;
      case CEffect::Kind::Decrease:
        post.ints[e.index] = pre.ints[e.index] - env.eval_int(e.value, pre);
        break;
      case CEffect::Kind::SetMatCell: {
        long long y = env.eval_int(e.row, pre);
        long long x = env.eval_int(e.col, pre);
        if (post.mats[e.index].in_bounds(y, x)) {
          post.mats[e.index].set(y, x, e.truth);
        }
        break;
      }
      case CEffect::Kind::When:
        if (env.eval_bool(e.condition, pre)) {
          apply_effects(env, pre, post, e.body);
        }
        break;
    }
  }
}

}  // namespace

WorldState apply(const GroundedEnvironment& env, const WorldState& s,
                 const GroundAction& a) {
  if (a.is_noop()) return s;
  if (!env.eval_bool(a.precondition, s)) {
    throw TransitionError("precondition of " + a.display +
                          " does not hold (corrupted stimulus?)");
  }
  WorldState post = s;
  apply_effects(env, s, post, a.effects);
  return post;
}

std::vector<FluentDiff> diff_states(const GroundedEnvironment& env,
                                    const WorldState& a, const WorldState& b) {
  std::vector<FluentDiff> diffs;
  const FluentIndex& fl = env.fluents();
  for (std::size_t i = 0; i < a.ints.size(); ++i) {
    if (a.ints[i] != b.ints[i]) {
      diffs.push_back({fl.int_names[i], std::to_string(a.ints[i]),
                       std::to_string(b.ints[i])});
    }
  }
  for (std::size_t i = 0; i < a.bools.size(); ++i) {
    if (a.bools[i] != b.bools[i]) {
      diffs.push_back({fl.bool_names[i], a.bools[i] ? "true" : "false",
                       b.bools[i] ? "true" : "false"});
    }
  }
  for (std::size_t i = 0; i < a.mats.size(); ++i) {
    if (!(a.mats[i] == b.mats[i])) {
      int changed = 0;
      for (int y = 1; y <= a.mats[i].rows; ++y) {
        for (int x = 1; x <= a.mats[i].cols; ++x) {
          if (a.mats[i].get(y, x) != b.mats[i].get(y, x)) ++changed;
        }
      }
      diffs.push_back({fl.mat_names[i], "",
                       std::to_string(changed) + " cell(s) changed"});
    }
  }
  return diffs;
}

Reconstructed reconstruct_action(const GroundedEnvironment& env,
                                 const WorldState& s_prev,
                                 const WorldState& s_next) {
  Reconstructed result;
  bool found = false;
  for (const auto& a : env.actions()) {
    if (!env.eval_bool(a.precondition, s_prev)) continue;
    if (apply(env, s_prev, a) == s_next) {
      if (!found) {
        result.action_id = a.id;
        found = true;
      } else {
        result.tie = true;  // canonical-first action already chosen
      }
    }
  }
  if (found) return result;
  if (s_prev == s_next) {
    result.noop = true;
    return result;
  }
  std::vector<FluentDiff> diffs = diff_states(env, s_prev, s_next);
  std::ostringstream os;
  os << "no ground action explains the state change (";
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    if (i) os << ", ";
    os << diffs[i].fluent << ": " << diffs[i].before << " -> "
       << diffs[i].after;
  }
  os << ")";
  throw ReconstructError(os.str(), std::move(diffs));
}

const GroundAction& action_ref(const GroundedEnvironment& env,
                               const Reconstructed& r) {
  if (r.noop || r.action_id < 0) return env.noop();
  return env.actions()[r.action_id];
}

}  // namespace invplan
