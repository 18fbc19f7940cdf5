#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "casetrain/case_types.hpp"
#include "casetrain/taxonomy.hpp"

namespace casetrain {

/// One violated rule found by validate_case. Violations are data, not
/// failures: a report with an empty list means the record is valid.
struct Violation {
    std::string path;     ///< field path, e.g. "packets[0].body.labs[1].range_lo"
    std::string rule;     ///< stable rule id, e.g. "lab.range.inverted"
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    [[nodiscard]] bool valid() const { return violations.empty(); }
    [[nodiscard]] std::string summary() const;
};

/// Structural parse of a case document. Enforces the schema only: required
/// keys, types, enum spellings, and rejection of unknown fields. Throws
/// Error(SchemaError) naming the offending path. Field constraints (inverted
/// lab ranges, narrative rules, ...) are left to validate_case.
CaseRecord parse_case_document(const std::string& document);

/// Checks every field constraint. Taxonomy rules are skipped when `taxonomy`
/// is null (record-local validation).
ValidationReport validate_case(const CaseRecord& record, const Taxonomy* taxonomy = nullptr);

/// Strict parse: parse_case_document followed by validate_case. Throws
/// Error(ValueError) naming the first violation.
CaseRecord parse_case(const std::string& document, const Taxonomy* taxonomy = nullptr);

/// Canonical serialization; parse_case(serialize_case(r)) == r for every
/// valid record.
std::string serialize_case(const CaseRecord& record);

nlohmann::ordered_json case_to_json(const CaseRecord& record);

}  // namespace casetrain
