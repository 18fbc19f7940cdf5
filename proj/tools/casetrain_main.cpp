// casetrain command line: corpus ingestion and validation, difficulty
// reports, keyword search, scripted session simulation, rubric scoring,
// bundle export, and the HTTP service.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "casetrain/clock.hpp"
#include "casetrain/difficulty.hpp"
#include "casetrain/errors.hpp"
#include "casetrain/service.hpp"
#include "casetrain/simulate.hpp"
#include "casetrain/store.hpp"

namespace {

using casetrain::Error;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;

struct GlobalOptions {
    std::string store_root = "./store";
    bool json = false;
    std::optional<std::int64_t> clock_seed;
};

std::shared_ptr<casetrain::Clock> make_clock(const GlobalOptions& options) {
    if (options.clock_seed) {
        return std::make_shared<casetrain::FixedClock>(*options.clock_seed);
    }
    return std::make_shared<casetrain::SystemClock>();
}

std::string read_file_or_exit(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "cannot read " << path << std::endl;
        std::exit(kExitIo);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void emit(const GlobalOptions& options, const ordered_json& record, const std::string& human) {
    if (options.json) {
        std::cout << record.dump() << std::endl;
    } else {
        std::cout << human << std::endl;
    }
}

int cmd_ingest(const GlobalOptions& options, const std::vector<std::string>& paths,
               bool validate_only) {
    casetrain::Store store(options.store_root, make_clock(options));
    int invalid = 0;
    for (const auto& path : paths) {
        const std::string document = read_file_or_exit(path);
        try {
            casetrain::ValidationReport report;
            if (validate_only) {
                const casetrain::CaseRecord record = casetrain::parse_case_document(document);
                report = casetrain::validate_case(record, &store.corpus()->taxonomy());
            } else {
                report = store.ingest_case(document);
            }
            if (report.valid()) {
                emit(options, {{"file", path}, {"status", "ok"}},
                     path + ": " + (validate_only ? "valid" : "ingested"));
            } else {
                ++invalid;
                for (const auto& violation : report.violations) {
                    emit(options,
                         {{"file", path},
                          {"status", "invalid"},
                          {"rule", violation.rule},
                          {"path", violation.path},
                          {"message", violation.message}},
                         path + ": " + violation.rule + " at " + violation.path + ": " +
                             violation.message);
                }
            }
        } catch (const Error& e) {
            ++invalid;
            emit(options,
                 {{"file", path},
                  {"status", "error"},
                  {"code", casetrain::error_code_name(e.code())},
                  {"message", e.what()}},
                 path + ": " + std::string(casetrain::error_code_name(e.code())) + ": " + e.what());
        }
    }
    if (invalid == 0 && !validate_only) {
        emit(options, {{"ingested", paths.size()}},
             std::to_string(paths.size()) + " case(s) ingested");
    }
    return invalid == 0 ? 0 : kExitInvalid;
}

int cmd_classify(const GlobalOptions& options, const std::string& case_id) {
    casetrain::Store store(options.store_root, make_clock(options));
    const casetrain::CaseRecord* record = store.corpus()->find_case(case_id);
    if (record == nullptr) {
        std::cerr << "unknown case " << case_id << std::endl;
        return kExitInvalid;
    }
    const casetrain::DifficultyProfile profile = casetrain::profile_case(*record);
    emit(options,
         {{"case_id", case_id},
          {"incidence", to_string(profile.incidence)},
          {"chain", to_string(profile.chain)},
          {"relevance", to_string(profile.relevance)},
          {"aggregate", profile.aggregate}},
         case_id + ": incidence=" + std::string(to_string(profile.incidence)) +
             " chain=" + std::string(to_string(profile.chain)) +
             " relevance=" + std::string(to_string(profile.relevance)) +
             " aggregate=" + std::to_string(profile.aggregate) + "/9");
    return 0;
}

int cmd_search(const GlobalOptions& options, const std::string& query,
               const std::string& path_filter) {
    casetrain::Store store(options.store_root, make_clock(options));
    std::vector<std::string> path;
    {
        std::istringstream in(path_filter);
        std::string segment;
        while (std::getline(in, segment, '/')) {
            if (!segment.empty()) path.push_back(segment);
        }
    }
    for (const auto& summary : store.corpus()->search(query, path)) {
        emit(options, {{"id", summary.id}, {"description", summary.description}},
             summary.id + ": " + summary.description);
    }
    return 0;
}

int cmd_simulate(const GlobalOptions& options, const std::string& script_path,
                 const std::string& out_path) {
    casetrain::Store store(options.store_root, make_clock(options));
    const casetrain::SimulationScript script =
        casetrain::parse_simulation_script(read_file_or_exit(script_path));
    const casetrain::SimulationResult result = casetrain::run_simulation(store, script);
    for (const auto& note : result.notes) {
        emit(options, {{"note", note}}, note);
    }
    if (!result.ok) {
        emit(options,
             {{"status", "failed"}, {"step", result.failed_step}, {"message", result.message}},
             "FAILED at step " + std::to_string(result.failed_step) + ": " + result.message);
        return kExitInvalid;
    }
    const std::string bundle = store.export_session(result.session_id);
    const std::string target =
        out_path.empty() ? (result.session_id + ".bundle.tar.gz") : out_path;
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    if (!out) {
        std::cerr << "cannot write " << target << std::endl;
        return kExitIo;
    }
    out << bundle;
    emit(options,
         {{"status", "ok"}, {"session_id", result.session_id}, {"bundle", target}},
         "OK session " + result.session_id + ", bundle written to " + target);
    return 0;
}

int cmd_score(const GlobalOptions& options, const std::string& report_id,
              const std::vector<std::string>& sheet_paths, bool attach) {
    std::vector<casetrain::RaterSheet> sheets;
    for (const auto& path : sheet_paths) {
        sheets.push_back(casetrain::parse_rater_sheet(read_file_or_exit(path)));
    }
    const casetrain::AggregateScore aggregate = casetrain::aggregate_scores(sheets);
    if (attach) {
        casetrain::Store store(options.store_root, make_clock(options));
        store.store_sheets(report_id, sheets);
    }
    for (std::size_t d = 0; d < casetrain::kCrcDimensionCount; ++d) {
        const auto dimension = casetrain::kCrcDimensions[d];
        emit(options,
             {{"report_id", report_id},
              {"dimension", to_string(dimension)},
              {"mean", aggregate.per_dimension[d].display()}},
             std::string(casetrain::crc_dimension_title(dimension)) + ": " +
                 aggregate.per_dimension[d].display());
    }
    emit(options, {{"report_id", report_id}, {"overall", aggregate.overall.display()}},
         "Overall: " + aggregate.overall.display());
    return 0;
}

int cmd_export(const GlobalOptions& options, const std::string& session_id,
               const std::string& out_path) {
    casetrain::Store store(options.store_root, make_clock(options));
    const std::string bundle = store.export_session(session_id);
    const std::string target = out_path.empty() ? (session_id + ".bundle.tar.gz") : out_path;
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    if (!out) {
        std::cerr << "cannot write " << target << std::endl;
        return kExitIo;
    }
    out << bundle;
    emit(options, {{"session_id", session_id}, {"bundle", target}},
         "bundle written to " + target);
    return 0;
}

int cmd_serve(const GlobalOptions& options, const std::string& listen) {
    auto store = std::make_shared<casetrain::Store>(options.store_root, make_clock(options));
    casetrain::ServiceConfig config = casetrain::ServiceConfig::from_env();
    if (!listen.empty()) {
        const std::size_t colon = listen.rfind(':');
        if (colon == std::string::npos) {
            config.listen_address = listen;
        } else {
            config.listen_address = listen.substr(0, colon);
            config.port = std::stoi(listen.substr(colon + 1));
        }
    }
    casetrain::Service service(store, config);
    return service.serve();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clinical case analysis trainer"};
    app.require_subcommand(1);

    GlobalOptions options;
    std::int64_t seed = 0;
    app.add_option("--store", options.store_root, "store root directory")
        ->envname("STORE_ROOT");
    app.add_flag("--json", options.json, "one JSON record per output line");
    auto* seed_option =
        app.add_option("--clock-seed", seed, "fixed timestamps for reproducible bundles");

    std::vector<std::string> paths;
    auto* ingest = app.add_subcommand("ingest", "validate and install cases into the corpus");
    ingest->add_option("paths", paths, "case files")->required();

    auto* validate = app.add_subcommand("validate", "validate case files without installing");
    validate->add_option("paths", paths, "case files")->required();

    std::string case_id;
    auto* classify = app.add_subcommand("classify", "difficulty profile of a case");
    classify->add_option("case", case_id, "case id")->required();

    std::string query;
    std::string path_filter;
    auto* search = app.add_subcommand("search", "keyword search over the corpus");
    search->add_option("query", query, "free text query");
    search->add_option("--path", path_filter, "taxonomy path filter, slash separated");

    std::string script_path;
    std::string out_path;
    auto* simulate = app.add_subcommand("simulate", "run a scripted session headlessly");
    simulate->add_option("script", script_path, "simulation script")->required();
    simulate->add_option("--out", out_path, "bundle output path");

    std::string report_id;
    std::vector<std::string> sheet_paths;
    bool attach = false;
    auto* score = app.add_subcommand("score", "aggregate rubric scores from rater sheets");
    score->add_option("report", report_id, "report (session) id")->required();
    score->add_option("sheets", sheet_paths, "rater sheet files")->required();
    score->add_flag("--attach", attach, "persist the sheets in the store");

    std::string session_id;
    auto* export_cmd = app.add_subcommand("export", "write a session bundle");
    export_cmd->add_option("session", session_id, "session id")->required();
    export_cmd->add_option("--out", out_path, "bundle output path");

    std::string listen;
    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    serve->add_option("--listen", listen, "host:port (defaults to LISTEN_ADDR or 127.0.0.1:8080)");

    CLI11_PARSE(app, argc, argv);
    if (seed_option->count() > 0) options.clock_seed = seed;

    try {
        if (ingest->parsed()) return cmd_ingest(options, paths, false);
        if (validate->parsed()) return cmd_ingest(options, paths, true);
        if (classify->parsed()) return cmd_classify(options, case_id);
        if (search->parsed()) return cmd_search(options, query, path_filter);
        if (simulate->parsed()) return cmd_simulate(options, script_path, out_path);
        if (score->parsed()) return cmd_score(options, report_id, sheet_paths, attach);
        if (export_cmd->parsed()) return cmd_export(options, session_id, out_path);
        if (serve->parsed()) return cmd_serve(options, listen);
    } catch (const Error& e) {
        std::cerr << casetrain::error_code_name(e.code()) << ": " << e.what();
        if (!e.detail().empty()) std::cerr << " (" << e.detail() << ")";
        std::cerr << std::endl;
        return e.code() == casetrain::ErrorCode::IoError ? kExitIo : kExitInvalid;
    }
    return 0;
}
