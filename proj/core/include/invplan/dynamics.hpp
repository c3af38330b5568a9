#pragma once

#include <vector>

#include "invplan/ground.hpp"

namespace invplan {

// Ids (into env.actions(), canonical order) of all ground actions whose
// preconditions hold in s. In multi-agent domains only the agent whose
// agentcode equals the turn counter has valid actions, which falls out of
// the compiled preconditions.
std::vector<int> valid_action_ids(const GroundedEnvironment& env,
                                  const WorldState& s);
std::vector<GroundAction> valid_actions(const GroundedEnvironment& env,
                                        const WorldState& s);

bool action_valid(const GroundedEnvironment& env, const WorldState& s,
                  const GroundAction& a);

// Applies all effects atomically (right-hand sides and conditions evaluated
// against the pre-state). Throws TransitionError when the precondition does
// not hold. The no-op returns the state unchanged.
WorldState apply(const GroundedEnvironment& env, const WorldState& s,
                 const GroundAction& a);

struct Reconstructed {
  int action_id = -1;  // -1 => distinguished no-op
  bool noop = false;
  bool tie = false;    // several actions explain the pair; canonical-first won
};

// First canonical-order valid action a with apply(s_prev, a) == s_next; the
// distinguished no-op when the states are equal and nothing else explains
// identity. Throws ReconstructError (with the fluent diffs) otherwise.
Reconstructed reconstruct_action(const GroundedEnvironment& env,
                                 const WorldState& s_prev,
                                 const WorldState& s_next);

const GroundAction& action_ref(const GroundedEnvironment& env,
                               const Reconstructed& r);

std::vector<FluentDiff> diff_states(const GroundedEnvironment& env,
                                    const WorldState& a, const WorldState& b);

}  // namespace invplan
