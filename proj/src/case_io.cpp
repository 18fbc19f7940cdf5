#include "casetrain/case_io.hpp"

#include <set>
#include <sstream>

#include <json.hpp>

#include "casetrain/errors.hpp"
#include "casetrain/text.hpp"

namespace casetrain {

using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::SchemaError, what, path);
}

const ordered_json& require(const ordered_json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) schema_fail(path + "." + key, "missing field");
    return *it;
}

void check_keys(const ordered_json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
    if (!obj.is_object()) schema_fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.contains(it.key())) schema_fail(path + "." + it.key(), "unknown field");
    }
}

std::string get_string(const ordered_json& j, const std::string& path) {
    if (!j.is_string()) schema_fail(path, "expected a string");
    return j.get<std::string>();
}

double get_number(const ordered_json& j, const std::string& path) {
    if (!j.is_number()) schema_fail(path, "expected a number");
    return j.get<double>();
}

int get_integer(const ordered_json& j, const std::string& path) {
    if (!j.is_number_integer()) schema_fail(path, "expected an integer");
    return j.get<int>();
}

std::vector<std::string> get_string_array(const ordered_json& j, const std::string& path) {
    if (!j.is_array()) schema_fail(path, "expected an array");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(get_string(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

Finding parse_finding(const ordered_json& j, const std::string& path) {
    check_keys(j, path, {"term", "synonyms", "polarity", "details", "step_visibility"});
    Finding f;
    f.term = get_string(require(j, path, "term"), path + ".term");
    if (j.contains("synonyms")) f.synonyms = get_string_array(j["synonyms"], path + ".synonyms");
    auto polarity = parse_polarity(get_string(require(j, path, "polarity"), path + ".polarity"));
    if (!polarity) schema_fail(path + ".polarity", "expected \"present\" or \"denied\"");
    f.polarity = *polarity;
    if (j.contains("details")) f.details = get_string(j["details"], path + ".details");
    auto vis = parse_step_visibility(
        get_string(require(j, path, "step_visibility"), path + ".step_visibility"));
    if (!vis) schema_fail(path + ".step_visibility", "expected \"initial\" or \"on_inquiry_only\"");
    f.step_visibility = *vis;
    return f;
}

LabResult parse_lab(const ordered_json& j, const std::string& path) {
    check_keys(j, path, {"item", "value", "unit", "range_lo", "range_hi", "expected"});
    LabResult lab;
    lab.item = get_string(require(j, path, "item"), path + ".item");
    const ordered_json& value = require(j, path, "value");
    if (value.is_number()) {
        lab.value = value.get<double>();
        lab.unit = get_string(require(j, path, "unit"), path + ".unit");
        lab.range_lo = get_number(require(j, path, "range_lo"), path + ".range_lo");
        lab.range_hi = get_number(require(j, path, "range_hi"), path + ".range_hi");
        if (j.contains("expected")) {
            schema_fail(path + ".expected", "not allowed for a numeric result");
        }
    } else if (value.is_string()) {
        lab.value = value.get<std::string>();
        lab.expected = get_string(require(j, path, "expected"), path + ".expected");
        if (j.contains("unit")) lab.unit = get_string(j["unit"], path + ".unit");
        if (j.contains("range_lo") || j.contains("range_hi")) {
            schema_fail(path + ".range_lo", "not allowed for a categorical result");
        }
    } else {
        schema_fail(path + ".value", "expected a number or a string");
    }
    return lab;
}

EvidencePacket parse_packet(const ordered_json& j, const std::string& path) {
    check_keys(j, path, {"id", "kind", "title", "reveal_order", "body"});
    EvidencePacket p;
    p.id = get_string(require(j, path, "id"), path + ".id");
    auto kind = parse_packet_kind(get_string(require(j, path, "kind"), path + ".kind"));
    if (!kind) {
        schema_fail(path + ".kind", "expected \"exam_text\", \"imaging_study\" or \"lab_panel\"");
    }
    p.kind = *kind;
    p.title = get_string(require(j, path, "title"), path + ".title");
    p.reveal_order = get_integer(require(j, path, "reveal_order"), path + ".reveal_order");
    if (p.reveal_order < 0) schema_fail(path + ".reveal_order", "expected a nonnegative integer");

    const ordered_json& body = require(j, path, "body");
    const std::string body_path = path + ".body";
    switch (p.kind) {
        case PacketKind::ExamText:
            check_keys(body, body_path, {"text"});
            p.text = get_string(require(body, body_path, "text"), body_path + ".text");
            break;
        case PacketKind::ImagingStudy:
            check_keys(body, body_path, {"image_path", "image_sha256", "report"});
            p.image_path =
                get_string(require(body, body_path, "image_path"), body_path + ".image_path");
            p.image_sha256 =
                get_string(require(body, body_path, "image_sha256"), body_path + ".image_sha256");
            p.report = get_string(require(body, body_path, "report"), body_path + ".report");
            break;
        case PacketKind::LabPanel: {
            check_keys(body, body_path, {"labs"});
            const ordered_json& labs = require(body, body_path, "labs");
            if (!labs.is_array()) schema_fail(body_path + ".labs", "expected an array");
            for (std::size_t i = 0; i < labs.size(); ++i) {
                p.labs.push_back(
                    parse_lab(labs[i], body_path + ".labs[" + std::to_string(i) + "]"));
            }
            break;
        }
    }
    return p;
}

bool hex_sha256(const std::string& s) {
    if (s.size() != 64) return false;
    for (char c : s) {
        bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
        if (!ok) return false;
    }
    return true;
}

}  // namespace

std::string ValidationReport::summary() const {
    std::ostringstream out;
    if (valid()) {
        out << "valid";
        return out.str();
    }
    for (const auto& v : violations) {
        out << v.rule << " at " << v.path << ": " << v.message << "\n";
    }
    return out.str();
}

CaseRecord parse_case_document(const std::string& document) {
    ordered_json j;
    try {
        j = ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("document is not valid JSON: ") + e.what());
    }
    const std::string root = "case";
    check_keys(j, root,
               {"id", "taxonomy_path", "description", "initial_narrative", "findings", "packets",
                "prognosis", "ground_truth", "difficulty"});

    CaseRecord record;
    record.id = get_string(require(j, root, "id"), "id");
    record.taxonomy_path = get_string_array(require(j, root, "taxonomy_path"), "taxonomy_path");
    record.description = get_string(require(j, root, "description"), "description");
    record.initial_narrative =
        get_string(require(j, root, "initial_narrative"), "initial_narrative");

    const ordered_json& findings = require(j, root, "findings");
    if (!findings.is_array()) schema_fail("findings", "expected an array");
    for (std::size_t i = 0; i < findings.size(); ++i) {
        record.findings.push_back(
            parse_finding(findings[i], "findings[" + std::to_string(i) + "]"));
    }

    if (j.contains("packets")) {
        const ordered_json& packets = j["packets"];
        if (!packets.is_array()) schema_fail("packets", "expected an array");
        for (std::size_t i = 0; i < packets.size(); ++i) {
            record.packets.push_back(
                parse_packet(packets[i], "packets[" + std::to_string(i) + "]"));
        }
    }

    record.prognosis = get_string(require(j, root, "prognosis"), "prognosis");

    const ordered_json& gt = require(j, root, "ground_truth");
    check_keys(gt, "ground_truth", {"diagnosis", "treatment"});
    record.ground_truth.diagnosis =
        get_string(require(gt, "ground_truth", "diagnosis"), "ground_truth.diagnosis");
    record.ground_truth.treatment =
        get_string(require(gt, "ground_truth", "treatment"), "ground_truth.treatment");

    const ordered_json& diff = require(j, root, "difficulty");
    check_keys(diff, "difficulty", {"incidence_per_100k", "chain_length", "classic_relevance"});
    record.difficulty.incidence_per_100k = get_number(
        require(diff, "difficulty", "incidence_per_100k"), "difficulty.incidence_per_100k");
    record.difficulty.chain_length =
        get_integer(require(diff, "difficulty", "chain_length"), "difficulty.chain_length");
    auto relevance = parse_classic_relevance(get_string(
        require(diff, "difficulty", "classic_relevance"), "difficulty.classic_relevance"));
    if (!relevance) {
        schema_fail("difficulty.classic_relevance",
                    "expected \"directly_related\", \"somewhat_related\" or \"not_related\"");
    }
    record.difficulty.classic_relevance = *relevance;
    return record;
}

ValidationReport validate_case(const CaseRecord& record, const Taxonomy* taxonomy) {
    ValidationReport report;
    auto add = [&](std::string path, std::string rule, std::string message) {
        report.violations.push_back({std::move(path), std::move(rule), std::move(message)});
    };

    if (record.id.empty()) add("id", "case.id.empty", "case id must be nonempty");

    const std::string narrative_norm = text::normalize(record.initial_narrative);
    for (std::size_t i = 0; i < record.findings.size(); ++i) {
        const Finding& f = record.findings[i];
        const std::string path = "findings[" + std::to_string(i) + "]";
        if (text::normalize(f.term).empty()) {
            add(path + ".term", "finding.term.empty", "finding term must be nonempty");
        }
        std::set<std::string> seen;
        seen.insert(text::normalize(f.term));
        for (std::size_t k = 0; k < f.synonyms.size(); ++k) {
            if (!seen.insert(text::normalize(f.synonyms[k])).second) {
                add(path + ".synonyms[" + std::to_string(k) + "]", "finding.synonyms.duplicate",
                    "synonym duplicates another surface form of the finding");
            }
        }
        if (f.polarity == Polarity::Denied) {
            if (!f.details.empty()) {
                add(path + ".details", "finding.denied.details",
                    "denied findings carry no details; the denial sentence is generated");
            }
            const std::string term_norm = text::normalize(f.term);
            if (!term_norm.empty() && narrative_norm.find(term_norm) != std::string::npos) {
                add("initial_narrative", "case.narrative.denied_term",
                    "initial narrative mentions denied finding \"" + f.term + "\"");
            }
        }
    }

    std::set<int> reveal_orders;
    for (std::size_t i = 0; i < record.packets.size(); ++i) {
        const EvidencePacket& p = record.packets[i];
        const std::string path = "packets[" + std::to_string(i) + "]";
        if (p.id.empty()) add(path + ".id", "packet.id.empty", "packet id must be nonempty");
        if (!reveal_orders.insert(p.reveal_order).second) {
            add(path + ".reveal_order", "packet.reveal_order.duplicate",
                "reveal_order " + std::to_string(p.reveal_order) + " used by another packet");
        }
        if (p.kind == PacketKind::LabPanel && p.labs.empty()) {
            add(path + ".body.labs", "packet.lab_panel.empty", "lab panel must be nonempty");
        }
        if (p.kind == PacketKind::ImagingStudy && !hex_sha256(p.image_sha256)) {
            add(path + ".body.image_sha256", "packet.image.hash_format",
                "expected 64 lowercase hex characters");
        }
        for (std::size_t k = 0; k < p.labs.size(); ++k) {
            const LabResult& lab = p.labs[k];
            const std::string lab_path = path + ".body.labs[" + std::to_string(k) + "]";
            if (lab.numeric()) {
                if (lab.range_lo > lab.range_hi) {
                    add(lab_path + ".normalRange", "lab.range.inverted",
                        "range_lo exceeds range_hi");
                }
                if (lab.unit.empty()) {
                    add(lab_path + ".unit", "lab.unit.empty",
                        "numeric results require a unit");
                }
            }
        }
    }

    if (record.difficulty.incidence_per_100k <= 0.0) {
        add("difficulty.incidence_per_100k", "case.difficulty.incidence_nonpositive",
            "incidence rate must be positive");
    }
    if (record.difficulty.chain_length < 1) {
        add("difficulty.chain_length", "case.difficulty.chain_length",
            "chain length must be at least 1");
    }

    if (taxonomy != nullptr) {
        auto check = taxonomy->check_path(record.taxonomy_path);
        if (record.taxonomy_path.empty() || !check.ok) {
            const std::string segment = record.taxonomy_path.empty()
                                            ? std::string("<empty>")
                                            : record.taxonomy_path[check.bad_index];
            add("taxonomy_path", "case.taxonomy.unresolved",
                "segment \"" + segment + "\" does not resolve");
        } else if (!taxonomy->is_root_to_leaf(record.taxonomy_path)) {
            add("taxonomy_path", "case.taxonomy.not_leaf",
                "path must end at a leaf node");
        }
    }

    return report;
}

CaseRecord parse_case(const std::string& document, const Taxonomy* taxonomy) {
    CaseRecord record = parse_case_document(document);
    ValidationReport report = validate_case(record, taxonomy);
    if (!report.valid()) {
        const Violation& v = report.violations.front();
        throw Error(ErrorCode::ValueError, v.rule + " at " + v.path + ": " + v.message);
    }
    return record;
}

std::string serialize_case(const CaseRecord& record) {
    return case_to_json(record).dump(2) + "\n";
}

nlohmann::ordered_json case_to_json(const CaseRecord& record) {
    ordered_json j;
    j["id"] = record.id;
    j["taxonomy_path"] = record.taxonomy_path;
    j["description"] = record.description;
    j["initial_narrative"] = record.initial_narrative;
    j["findings"] = ordered_json::array();
    for (const auto& f : record.findings) {
        ordered_json fj;
        fj["term"] = f.term;
        fj["synonyms"] = f.synonyms;
        fj["polarity"] = to_string(f.polarity);
        fj["details"] = f.details;
        fj["step_visibility"] = to_string(f.step_visibility);
        j["findings"].push_back(std::move(fj));
    }
    j["packets"] = ordered_json::array();
    for (const auto& p : record.packets) {
        ordered_json pj;
        pj["id"] = p.id;
        pj["kind"] = to_string(p.kind);
        pj["title"] = p.title;
        pj["reveal_order"] = p.reveal_order;
        ordered_json body;
        switch (p.kind) {
            case PacketKind::ExamText:
                body["text"] = p.text;
                break;
            case PacketKind::ImagingStudy:
                body["image_path"] = p.image_path;
                body["image_sha256"] = p.image_sha256;
                body["report"] = p.report;
                break;
            case PacketKind::LabPanel: {
                body["labs"] = ordered_json::array();
                for (const auto& lab : p.labs) {
                    ordered_json lj;
                    lj["item"] = lab.item;
                    if (lab.numeric()) {
                        lj["value"] = std::get<double>(lab.value);
                        lj["unit"] = lab.unit;
                        lj["range_lo"] = lab.range_lo;
                        lj["range_hi"] = lab.range_hi;
                    } else {
                        lj["value"] = std::get<std::string>(lab.value);
                        if (!lab.unit.empty()) lj["unit"] = lab.unit;
                        lj["expected"] = lab.expected;
                    }
                    body["labs"].push_back(std::move(lj));
                }
                break;
            }
        }
        pj["body"] = std::move(body);
        j["packets"].push_back(std::move(pj));
    }
    j["prognosis"] = record.prognosis;
    j["ground_truth"] = {{"diagnosis", record.ground_truth.diagnosis},
                         {"treatment", record.ground_truth.treatment}};
    j["difficulty"] = {{"incidence_per_100k", record.difficulty.incidence_per_100k},
                       {"chain_length", record.difficulty.chain_length},
                       {"classic_relevance", to_string(record.difficulty.classic_relevance)}};
    return j;
}

}  // namespace casetrain
