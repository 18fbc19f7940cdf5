#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "casetrain/store.hpp"

namespace casetrain {

/// A replayable session script: a case id plus an ordered list of steps.
/// Steps carry either an action for the session engine or an embedded
/// assertion; actions that name diagnosis entries refer to labels introduced
/// by an earlier `diagnosis_add` in the same script.
///
/// Step forms (`op` selects):
///   inquire{text, expect?: [{term, verdict}]}
///   diagnosis_add{label, category, rationale?}
///   diagnosis_move{label, category, note?}
///   diagnosis_attach{label, ref}
///   diagnosis_remove{label, note?}
///   mindmap_add{factor, text, source_ref?}
///   advance{}
///   evidence{expect_title?}
///   annotate{packet_id, rect: [x,y,w,h] | points: [[x,y],...], label, note?}
///   assert_step{step}
///   assert_diagnosis{label, category, removed?}
///   report{}
struct SimulationScript {
    std::string case_id;
    std::vector<nlohmann::ordered_json> steps;
};

SimulationScript parse_simulation_script(const std::string& text);

struct SimulationResult {
    bool ok = true;
    int failed_step = 0;       ///< 1-based script position of the first failure
    std::string message;       ///< failed expectation, empty when ok
    std::string session_id;
    std::vector<std::string> notes;  ///< one line per executed step
};

/// Runs the script headlessly through the store's session engine (the same
/// commit path the HTTP API uses). Stops at the first failed assertion.
SimulationResult run_simulation(Store& store, const SimulationScript& script);

}  // namespace casetrain
