#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "invplan/domains.hpp"
#include "invplan/dynamics.hpp"
#include "invplan/legend.hpp"
#include "invplan/siam.hpp"

namespace invplan {

// One symbolic video frame: a rectangular grid of cell symbols, per-cell
// overflow lists for stacked objects, and optional annotations (turn).
struct FrameGrid {
  std::vector<std::vector<std::string>> cells;  // [row][col], 1-based in JSON
  std::map<std::pair<int, int>, std::vector<std::string>> overflow;  // (y,x)
  std::optional<int> turn;

  int rows() const { return static_cast<int>(cells.size()); }
  int cols() const { return cells.empty() ? 0 : static_cast<int>(cells[0].size()); }
  bool operator==(const FrameGrid&) const = default;
};

// A stimulus: domain reference, legend, ordered frames and the query.
struct Stimulus {
  std::string id;
  nlohmann::json domain_ref;
  GridDims grid;
  Legend legend;
  std::vector<FrameGrid> frames;
  // Ground truth for objects never drawn (hidden belief objects): object ->
  // container object name or "x,y" literal.
  std::map<std::string, std::string> hidden_placements;
  QuerySpec query;
  std::string scenario;
  std::optional<nlohmann::json> agent_config;  // overrides the bundle default
};

// Schema-validated parse. Errors: unknown symbol (named with its cell),
// ragged frames, dimension mismatch.
Stimulus parse_stimulus(const nlohmann::json& doc);
Stimulus load_stimulus(const std::filesystem::path& path);
nlohmann::json stimulus_to_json(const Stimulus& stim);

// Decodes every frame cell-by-cell and assembles world states. Frames after
// the first are matched against the single-step dynamics, which is also how
// hidden fluents (held objects, consumed keys) are recovered. Inconsistent
// frames are reported, not silently fixed.
std::vector<WorldState> frames_to_states(const Stimulus& stim,
                                         const DomainBundle& bundle,
                                         const GroundedEnvironment& env,
                                         std::vector<std::string>* warnings = nullptr);

// Inverse of the decoder; canonical symbol choice makes encode(decode(x))
// reproduce x symbol-for-symbol.
std::vector<FrameGrid> states_to_frames(const GroundedEnvironment& env,
                                        const Legend& legend,
                                        const std::vector<WorldState>& states,
                                        bool annotate_turn);

// Reconstructs one action per consecutive state pair (world_model contract).
std::vector<Reconstructed> derive_actions(const GroundedEnvironment& env,
                                          const std::vector<WorldState>& states,
                                          std::vector<std::string>* warnings = nullptr);

// Parses a query spec from JSON: ["goal"] or [{"kind": "goal",
// "subjects": [...]}].
QuerySpec parse_query_spec(const nlohmann::json& doc);
nlohmann::json query_spec_to_json(const QuerySpec& q);

// Renders one state as a PDDL problem :init block (position and counter
// fluents, true predicates, and set bit-matrix cells).
std::string state_to_problem_init(const GroundedEnvironment& env,
                                  const WorldState& s);

// ---------------------------------------------------------------------------
// Human judgment tables

struct HumanDataTable {
  struct Row {
    std::string stimulus_id;
    std::string question_id;
    double mean = 0.0;
    std::optional<double> stddev;
  };
  std::vector<Row> rows;
  // Stimuli whose per-stimulus means sum to 1 within 0.01.
  std::set<std::string> normalized_stimuli;
};

// CSV with header stimulus_id,question_id,mean[,std]. Errors: missing
// column, non-numeric rating, duplicate (stimulus, question) pair.
HumanDataTable load_human_data(std::istream& in);
HumanDataTable load_human_data(const std::filesystem::path& path);

}  // namespace invplan
