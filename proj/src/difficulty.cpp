#include "casetrain/difficulty.hpp"

#include <string>

#include "casetrain/errors.hpp"

namespace casetrain {

std::string_view to_string(DifficultyLevel level) {
    switch (level) {
        case DifficultyLevel::Low: return "low";
        case DifficultyLevel::Medium: return "medium";
        case DifficultyLevel::High: return "high";
    }
    return "low";
}

DifficultyLevel classify_incidence(double rate_per_100k) {
    if (!(rate_per_100k > 0.0)) {
        throw Error(ErrorCode::DomainError, "incidence rate must be positive",
                    std::to_string(rate_per_100k));
    }
    if (rate_per_100k > 100.0) return DifficultyLevel::Low;
    if (rate_per_100k >= 10.0) return DifficultyLevel::Medium;
    return DifficultyLevel::High;
}

DifficultyLevel classify_chain(int chain_length) {
    if (chain_length < 1) {
        throw Error(ErrorCode::DomainError, "chain length must be at least 1",
                    std::to_string(chain_length));
    }
    if (chain_length <= 3) return DifficultyLevel::Low;
    if (chain_length <= 7) return DifficultyLevel::Medium;
    return DifficultyLevel::High;
}

DifficultyLevel classify_relevance(ClassicRelevance relevance) {
    switch (relevance) {
        case ClassicRelevance::DirectlyRelated: return DifficultyLevel::Low;
        case ClassicRelevance::SomewhatRelated: return DifficultyLevel::Medium;
        case ClassicRelevance::NotRelated: return DifficultyLevel::High;
    }
    return DifficultyLevel::Low;
}

DifficultyProfile profile_case(const CaseRecord& record) {
    DifficultyProfile profile{
        classify_incidence(record.difficulty.incidence_per_100k),
        classify_chain(record.difficulty.chain_length),
        classify_relevance(record.difficulty.classic_relevance),
        0,
    };
    profile.aggregate = rank(profile.incidence) + rank(profile.chain) + rank(profile.relevance);
    return profile;
}

}  // namespace casetrain
