#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace casetrain {

/// One node of the corpus-defined specialty taxonomy. Nodes form a forest;
/// top-level specialties are the roots.
struct TaxonomyNode {
    std::string id;
    std::string label;
    std::vector<std::string> children;  ///< ordered child node ids
};

enum class Polarity { Present, Denied };

enum class StepVisibility {
    Initial,        ///< part of the presenting narrative
    OnInquiryOnly,  ///< surfaced only when the learner asks
};

/// A symptom or sign the case record can answer questions about. Denied
/// findings are the case's negative symptoms: absent from the narrative,
/// reachable only through inquiry.
struct Finding {
    std::string term;
    std::vector<std::string> synonyms;
    Polarity polarity = Polarity::Present;
    std::string details;  ///< severity, duration, measurements; empty for Denied
    StepVisibility step_visibility = StepVisibility::OnInquiryOnly;

    bool operator==(const Finding&) const = default;
};

/// Numeric result with a closed normal interval, or a categorical result with
/// an expected value.
struct LabResult {
    std::string item;
    std::variant<double, std::string> value;
    std::string unit;            ///< required when value is numeric
    double range_lo = 0.0;       ///< numeric only
    double range_hi = 0.0;       ///< numeric only
    std::string expected;        ///< categorical only

    [[nodiscard]] bool numeric() const { return std::holds_alternative<double>(value); }
    bool operator==(const LabResult&) const = default;
};

enum class PacketKind { ExamText, ImagingStudy, LabPanel };

/// A staged unit of additional clinical data revealed during analysis.
/// Exactly one of the body groups is populated, matching `kind`.
struct EvidencePacket {
    std::string id;
    PacketKind kind = PacketKind::ExamText;
    std::string title;
    int reveal_order = 0;

    std::string text;          ///< ExamText
    std::string image_path;    ///< ImagingStudy: relative path into the corpus
    std::string image_sha256;  ///< ImagingStudy: content hash of the binary
    std::string report;        ///< ImagingStudy: written report
    std::vector<LabResult> labs;  ///< LabPanel

    bool operator==(const EvidencePacket&) const = default;
};

enum class ClassicRelevance { DirectlyRelated, SomewhatRelated, NotRelated };

struct DifficultyAttributes {
    double incidence_per_100k = 0.0;
    int chain_length = 0;
    ClassicRelevance classic_relevance = ClassicRelevance::DirectlyRelated;

    bool operator==(const DifficultyAttributes&) const = default;
};

struct GroundTruth {
    std::string diagnosis;
    std::string treatment;

    bool operator==(const GroundTruth&) const = default;
};

/// The full structured clinical case consumed by every other module.
struct CaseRecord {
    std::string id;
    std::vector<std::string> taxonomy_path;  ///< root-to-leaf node ids
    std::string description;                 ///< short card text
    std::string initial_narrative;           ///< chief complaint and history
    std::vector<Finding> findings;
    std::vector<EvidencePacket> packets;
    std::string prognosis;
    GroundTruth ground_truth;
    DifficultyAttributes difficulty;

    [[nodiscard]] const EvidencePacket* packet_by_id(const std::string& packet_id) const;

    /// Packets sorted ascending by reveal_order (ties keep authored order,
    /// though validation rejects duplicate orders).
    [[nodiscard]] std::vector<const EvidencePacket*> packets_in_reveal_order() const;

    bool operator==(const CaseRecord&) const = default;
};

/// Case card data returned by taxonomy browsing and search.
struct CaseSummary {
    std::string id;
    std::string description;
    std::vector<std::string> taxonomy_path;
};

std::string_view to_string(Polarity p);
std::string_view to_string(StepVisibility v);
std::string_view to_string(PacketKind k);
std::string_view to_string(ClassicRelevance r);

std::optional<Polarity> parse_polarity(std::string_view s);
std::optional<StepVisibility> parse_step_visibility(std::string_view s);
std::optional<PacketKind> parse_packet_kind(std::string_view s);
std::optional<ClassicRelevance> parse_classic_relevance(std::string_view s);

}  // namespace casetrain
