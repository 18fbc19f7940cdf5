#include "casetrain/case_types.hpp"

#include <algorithm>

namespace casetrain {

const EvidencePacket* CaseRecord::packet_by_id(const std::string& packet_id) const {
    for (const auto& p : packets) {
        if (p.id == packet_id) return &p;
    }
    return nullptr;
}

std::vector<const EvidencePacket*> CaseRecord::packets_in_reveal_order() const {
    std::vector<const EvidencePacket*> out;
    out.reserve(packets.size());
    for (const auto& p : packets) out.push_back(&p);
    std::stable_sort(out.begin(), out.end(), [](const EvidencePacket* a, const EvidencePacket* b) {
        return a->reveal_order < b->reveal_order;
    });
    return out;
}

std::string_view to_string(Polarity p) {
    return p == Polarity::Present ? "present" : "denied";
}

std::string_view to_string(StepVisibility v) {
    return v == StepVisibility::Initial ? "initial" : "on_inquiry_only";
}

std::string_view to_string(PacketKind k) {
    switch (k) {
        case PacketKind::ExamText: return "exam_text";
        case PacketKind::ImagingStudy: return "imaging_study";
        case PacketKind::LabPanel: return "lab_panel";
    }
    return "exam_text";
}

std::string_view to_string(ClassicRelevance r) {
    switch (r) {
        case ClassicRelevance::DirectlyRelated: return "directly_related";
        case ClassicRelevance::SomewhatRelated: return "somewhat_related";
        case ClassicRelevance::NotRelated: return "not_related";
    }
    return "directly_related";
}

std::optional<Polarity> parse_polarity(std::string_view s) {
    if (s == "present") return Polarity::Present;
    if (s == "denied") return Polarity::Denied;
    return std::nullopt;
}

std::optional<StepVisibility> parse_step_visibility(std::string_view s) {
    if (s == "initial") return StepVisibility::Initial;
    if (s == "on_inquiry_only") return StepVisibility::OnInquiryOnly;
    return std::nullopt;
}

std::optional<PacketKind> parse_packet_kind(std::string_view s) {
    if (s == "exam_text") return PacketKind::ExamText;
    if (s == "imaging_study") return PacketKind::ImagingStudy;
    if (s == "lab_panel") return PacketKind::LabPanel;
    return std::nullopt;
}

std::optional<ClassicRelevance> parse_classic_relevance(std::string_view s) {
    if (s == "directly_related") return ClassicRelevance::DirectlyRelated;
    if (s == "somewhat_related") return ClassicRelevance::SomewhatRelated;
    if (s == "not_related") return ClassicRelevance::NotRelated;
    return std::nullopt;
}

}  // namespace casetrain
