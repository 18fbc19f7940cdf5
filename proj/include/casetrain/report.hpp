#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "casetrain/case_types.hpp"
#include "casetrain/session.hpp"

namespace casetrain {

/// The eight dimensions of the clinical reasoning cycle, in report order.
enum class CrcDimension {
    ConsiderSituation,
    CollectCues,
    ProcessInformation,
    IdentifyProblems,
    EstablishGoals,
    TakeAction,
    EvaluateOutcomes,
    Reflect,
};

inline constexpr std::size_t kCrcDimensionCount = 8;

inline constexpr CrcDimension kCrcDimensions[kCrcDimensionCount] = {
    CrcDimension::ConsiderSituation, CrcDimension::CollectCues,
    CrcDimension::ProcessInformation, CrcDimension::IdentifyProblems,
    CrcDimension::EstablishGoals,     CrcDimension::TakeAction,
    CrcDimension::EvaluateOutcomes,   CrcDimension::Reflect,
};

std::string_view to_string(CrcDimension dimension);
std::optional<CrcDimension> parse_crc_dimension(std::string_view s);

/// Human-readable section heading, e.g. "Consider the Patient Situation".
std::string_view crc_dimension_title(CrcDimension dimension);

struct CrcSection {
    CrcDimension dimension;
    std::string auto_content;     ///< assembled from the session, regenerable
    std::string learner_content;  ///< the learner's own writing, never machine-touched
};

/// The structured case analysis report: always exactly eight sections in the
/// fixed reasoning-cycle order.
struct CaseReport {
    std::string session_id;
    std::array<CrcSection, kCrcDimensionCount> sections;

    [[nodiscard]] const CrcSection& section(CrcDimension dimension) const {
        return sections[static_cast<std::size_t>(dimension)];
    }
    [[nodiscard]] CrcSection& section(CrcDimension dimension) {
        return sections[static_cast<std::size_t>(dimension)];
    }
};

/// Builds the report from a finished session. Auto-content is a pure function
/// of the snapshot; learner content starts empty. Throws Error(WrongStep)
/// unless the session is at PrognosisReflection.
CaseReport generate_report(const Session& session, const CaseRecord& record);

/// Plain-text rendering with one heading per section.
std::string report_to_text(const CaseReport& report);

nlohmann::ordered_json report_to_json(const CaseReport& report);
CaseReport report_from_json(const nlohmann::ordered_json& j);

// ---------------------------------------------------------------------------
// Rubric
// ---------------------------------------------------------------------------

inline constexpr int kCriterionCount = 16;
inline constexpr int kMaxScore = 7;

struct RubricCriterion {
    int id;  ///< 1..16
    CrcDimension dimension;
    std::string_view title;
    std::string_view text;
};

/// The sixteen grading criteria, two per reasoning-cycle dimension.
const std::array<RubricCriterion, kCriterionCount>& rubric_criteria();

struct RaterSheet {
    std::string rater_id;
    std::map<int, int> scores;  ///< criterion id -> integer score in [0, 7]
};

/// Parses a sheet document `{rater_id, scores: {"1": n, ..., "16": n}}`.
/// Range and completeness problems surface later via aggregate_scores.
RaterSheet parse_rater_sheet(const std::string& document);

/// Exact mean kept as a reduced fraction so aggregation never accumulates
/// floating point error; display rounds half-up at two decimals.
struct ExactMean {
    long long num = 0;
    long long den = 1;

    [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    [[nodiscard]] std::string display() const;  ///< "5.50"

    bool operator==(const ExactMean&) const = default;
};

struct AggregateScore {
    std::array<ExactMean, kCriterionCount> per_criterion;       ///< indexed by id-1
    std::array<ExactMean, kCrcDimensionCount> per_dimension;
    ExactMean overall;
};

/// Mean over raters per criterion, mean of the two criterion means per
/// dimension, mean of the eight dimension means overall. Throws
/// Error(InvalidScore) naming rater and criterion for an out-of-range or
/// missing score, and Error(InvalidScore) for an empty sheet list.
AggregateScore aggregate_scores(const std::vector<RaterSheet>& sheets);

}  // namespace casetrain
