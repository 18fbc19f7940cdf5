#pragma once

#include <string_view>

#include "casetrain/case_types.hpp"

namespace casetrain {

enum class DifficultyLevel { Low = 1, Medium = 2, High = 3 };

/// Numeric rank used for the aggregate: Low=1, Medium=2, High=3.
constexpr int rank(DifficultyLevel level) { return static_cast<int>(level); }

std::string_view to_string(DifficultyLevel level);

struct DifficultyProfile {
    DifficultyLevel incidence;
    DifficultyLevel chain;
    DifficultyLevel relevance;
    int aggregate;  ///< rank sum, always in [3, 9]
};

/// Annual incidence per 100,000: above 100 is a common disease (Low), 10-100
/// inclusive is Medium, below 10 is rare (High). Throws Error(DomainError)
/// for nonpositive rates.
DifficultyLevel classify_incidence(double rate_per_100k);

/// Reasoning-chain length in steps: 1-3 Low, 4-7 Medium, above 7 High.
/// Throws Error(DomainError) for lengths below 1.
DifficultyLevel classify_chain(int chain_length);

DifficultyLevel classify_relevance(ClassicRelevance relevance);

DifficultyProfile profile_case(const CaseRecord& record);

}  // namespace casetrain
