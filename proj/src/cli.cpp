#include "partsim/cli.hpp"

#include "partsim/config.hpp"
#include "partsim/harness.hpp"
#include "partsim/scheduler.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace partsim {

namespace {

std::string config_error_code(const ConfigError& e)
{
    if (dynamic_cast<const SyntaxError*>(&e) != nullptr) {
        return "XML_SYNTAX";
    }
    if (dynamic_cast<const RangeError*>(&e) != nullptr) {
        return "VALUE_RANGE";
    }
    return "SCHEMA";
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << text;
    out.flush();
    if (!out) {
        throw IoError("error writing " + path);
    }
}

std::string format_deliveries(const std::vector<DeliveryRecord>& deliveries)
{
    std::ostringstream os;
    for (const auto& d : deliveries) {
        for (std::size_t i = 0; i < d.delivered_at.size(); ++i) {
            os << d.sent_at.count() << ",DELIVERY," << d.payload_size << ',' << d.load.cpu_load << ','
               << d.load.memory_load << ',' << i << ',' << d.delivered_at[i].count() << '\n';
        }
    }
    return os.str();
}

void print_summary(std::span<const RunRow> rows, std::ostream& out)
{
    const auto groups = summarize_groups(rows);
    if (groups.empty()) {
        out << "no data\n";
        return;
    }
    out << format_summary_table(groups);
}

ExitCode cmd_validate(const std::string& path, std::ostream& out, std::ostream& err)
{
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError& e) {
        err << "partsim: " << e.what() << '\n';
        return ExitCode::IoError;
    }
    try {
        const auto report = validate(parse_config(text));
        for (const auto& f : report) {
            out << format_finding(f) << '\n';
        }
        return report.empty() ? ExitCode::Success : ExitCode::Findings;
    } catch (const ConfigError& e) {
        out << format_finding(Finding{config_error_code(e), Severity::Error, path, e.what()}) << '\n';
        return ExitCode::Findings;
    }
}

struct RunArgs {
    std::string scenario;
    std::string out;
    std::string trace;
    std::optional<std::uint64_t> frames;
    std::string until;
    std::optional<std::uint64_t> seed;
};

ExitCode cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err)
{
    Scenario sc;
    try {
        sc = load_scenario(a.scenario);
    } catch (const IoError& e) {
        err << "partsim: " << e.what() << '\n';
        return ExitCode::IoError;
    } catch (const std::exception& e) {
        err << "partsim: " << a.scenario << ": " << e.what() << '\n';
        return ExitCode::Findings;
    }

    if (a.seed) {
        sc.seed = *a.seed;
    } else if (const char* env = std::getenv("PARTSIM_SEED"); env != nullptr && *env != '\0') {
        const std::string_view v{env};
        std::uint64_t seed = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
        if (ec != std::errc{} || ptr != v.data() + v.size()) {
            err << "partsim: PARTSIM_SEED is not an unsigned integer: " << v << '\n';
            return ExitCode::Findings;
        }
        sc.seed = seed;
    }

    RunOptions options;
    if (a.frames) {
        if (sc.system) {
            options.horizon = sc.system->plan.major_frame * static_cast<Duration::rep>(*a.frames);
        }
    } else if (!a.until.empty()) {
        try {
            options.horizon = parse_duration(a.until);
        } catch (const DurationFormatError& e) {
            err << "partsim: --until: " << e.what() << '\n';
            return ExitCode::Findings;
        }
    }

    RunResult result;
    try {
        result = run_scenario(sc, options);
    } catch (const ScenarioInvalid& e) {
        for (const auto& f : e.findings()) {
            out << format_finding(f) << '\n';
        }
        return ExitCode::Findings;
    } catch (const ConfigInvalid& e) {
        for (const auto& f : e.findings()) {
            out << format_finding(f) << '\n';
        }
        return ExitCode::Findings;
    }

    try {
        if (!a.out.empty()) {
            export_csv(result.rows, a.out);
        }
        if (!a.trace.empty()) {
            write_text(a.trace, sc.mode == ScenarioMode::Partitioned ? format_trace(result.trace)
                                                                     : format_deliveries(result.deliveries));
        }
    } catch (const IoError& e) {
        err << "partsim: " << e.what() << '\n';
        return ExitCode::IoError;
    }

    print_summary(result.rows, out);
    if (result.fault) {
        err << "partsim: runtime fault: " << *result.fault << '\n';
        return ExitCode::RuntimeError;
    }
    return ExitCode::Success;
}

ExitCode cmd_report(const std::vector<std::string>& paths, std::ostream& out, std::ostream& err)
{
    std::vector<RunRow> rows;
    for (const auto& path : paths) {
        try {
            auto part = parse_csv(read_file(path));
            rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
        } catch (const IoError& e) {
            err << "partsim: " << e.what() << '\n';
            return ExitCode::IoError;
        } catch (const CsvError& e) {
            err << "partsim: " << path << ": " << e.what() << '\n';
            return ExitCode::IoError;
        }
    }
    print_summary(rows, out);
    return ExitCode::Success;
}

}  // namespace

ExitCode run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Partitioned-system communication simulator", "partsim"};
    app.require_subcommand(1);

    std::string config_path;
    auto* validate_cmd = app.add_subcommand("validate", "Check a system description and print findings");
    validate_cmd->add_option("config", config_path, "XML system description")->required();

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write per-repetition results");
    run_cmd->add_option("scenario", run.scenario, "Scenario file")->required();
    run_cmd->add_option("--out", run.out, "CSV output path");
    auto* frames_opt = run_cmd->add_option("--frames", run.frames, "Run each repetition for N major frames");
    auto* until_opt = run_cmd->add_option("--until", run.until, "Run each repetition until this time (e.g. 10ms)");
    frames_opt->excludes(until_opt);
    run_cmd->add_option("--seed", run.seed, "Random seed (falls back to PARTSIM_SEED)");
    run_cmd->add_option("--trace", run.trace, "Trace output path");

    std::vector<std::string> csv_paths;
    auto* report_cmd = app.add_subcommand("report", "Summarize one or more result CSVs");
    report_cmd->add_option("csv", csv_paths, "Result CSV files")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ExitCode::Success;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return ExitCode::Success;
        }
        err << "partsim: " << e.what() << '\n';
        return ExitCode::Findings;
    }

    if (validate_cmd->parsed()) {
        return cmd_validate(config_path, out, err);
    }
    if (run_cmd->parsed()) {
        return cmd_run(run, out, err);
    }
    return cmd_report(csv_paths, out, err);
}

}  // namespace partsim
