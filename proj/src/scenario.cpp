#include "partsim/calibration.hpp"
#include "partsim/harness.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace partsim {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string{s.substr(b, e - b + 1)};
}

std::string strip_comment(std::string_view line)
{
    return trim(line.substr(0, line.find('#')));
}

std::vector<std::string> words(std::string_view s)
{
    std::vector<std::string> out;
    std::istringstream is{std::string{s}};
    for (std::string w; is >> w;) {
        out.push_back(std::move(w));
    }
    return out;
}

std::uint64_t parse_u64(const std::string& v, const std::string& what)
{
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
        throw ScenarioError("bad integer '" + v + "' for " + what);
    }
    return out;
}

double parse_double(const std::string& v, const std::string& what)
{
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) {
        throw ScenarioError("bad number '" + v + "' for " + what);
    }
    return out;
}

Duration parse_dur(const std::string& v, const std::string& what)
{
    try {
        return parse_duration(v);
    } catch (const DurationFormatError& e) {
        throw ScenarioError(what + ": " + e.what());
    }
}

LinkModel parse_link(const std::string& value, std::uint64_t seed_salt, const std::string& what)
{
    const auto w = words(value);
    if (w.size() != 3 && w.size() != 4) {
        throw ScenarioError(what + " expects '<base> <per_byte> <jitter> [seed]'");
    }
    LinkModel link{parse_dur(w[0], what), parse_dur(w[1], what), parse_dur(w[2], what), seed_salt};
    if (w.size() == 4) {
        link.rng_seed = parse_u64(w[3], what);
    }
    return link;
}

LoadPair parse_load_pair(const std::string& line)
{
    const auto arrow = line.find("->");
    if (arrow == std::string::npos) {
        throw ScenarioError("load pair '" + line + "' expects '<cpu> <mem> -> <cpu> <mem>'");
    }
    const auto lhs = words(line.substr(0, arrow));
    const auto rhs = words(line.substr(arrow + 2));
    if (lhs.size() != 2 || rhs.size() != 2) {
        throw ScenarioError("load pair '" + line + "' expects '<cpu> <mem> -> <cpu> <mem>'");
    }
    return LoadPair{LoadProfile{parse_double(lhs[0], "relaxed cpu"), parse_double(lhs[1], "relaxed memory")},
                    LoadProfile{parse_double(rhs[0], "stressed cpu"), parse_double(rhs[1], "stressed memory")}};
}

void split_kv(const std::string& line, std::string& key, std::string& value)
{
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
        throw ScenarioError("expected 'key = value', got '" + line + "'");
    }
    key = trim(std::string_view{line}.substr(0, eq));
    value = trim(std::string_view{line}.substr(eq + 1));
}

}  // namespace

std::string_view to_string(ScenarioMode m)
{
    return m == ScenarioMode::Partitioned ? "PARTITIONED" : "BROKER";
}

ScenarioInvalid::ScenarioInvalid(ValidationReport findings)
    : std::runtime_error("scenario invalid (" + std::to_string(findings.size()) + " finding(s))"),
      findings_(std::move(findings))
{
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in{path, std::ios::binary};
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::ostringstream os;
    os << in.rdbuf();
    if (in.bad()) {
        throw IoError("error reading " + path.string());
    }
    return os.str();
}

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir)
{
    Scenario sc;
    std::string section;       // "", "system", "script", "health", "broker", "loads"
    std::string inline_xml;
    std::string script_text;
    PartitionId script_partition = 0;
    ScriptMode script_mode = ScriptMode::Once;
    std::optional<std::string> system_path;

    std::optional<std::size_t> subscribers;
    std::optional<LinkModel> uplink;
    std::optional<LinkModel> downlink_all;
    std::map<std::size_t, LinkModel> downlink_one;
    BrokerTopology topo = default_topology(1);
    bool broker_seen = false;

    auto flush_script = [&] {
        if (section == "script") {
            sc.scripts.push_back(parse_script(script_text, script_partition, script_mode));
            script_text.clear();
        }
    };

    std::istringstream in{std::string{text}};
    std::size_t line_no = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        const std::string stripped = trim(raw);
        if (!stripped.empty() && stripped.front() == '[') {
            const auto close = stripped.find(']');
            if (close == std::string::npos) {
                throw ScenarioError("line " + std::to_string(line_no) + ": unterminated section header");
            }
            flush_script();
            const auto head = words(stripped.substr(1, close - 1));
            if (head.empty()) {
                throw ScenarioError("line " + std::to_string(line_no) + ": empty section header");
            }
            section = head[0];
            if (section == "script") {
                if (head.size() < 2 || head.size() > 3) {
                    throw ScenarioError("line " + std::to_string(line_no) + ": expected [script <partition> [once|repeat]]");
                }
                script_partition = static_cast<PartitionId>(parse_u64(head[1], "script partition"));
                script_mode = ScriptMode::Once;
                if (head.size() == 3) {
                    if (head[2] == "repeat") {
                        script_mode = ScriptMode::RepeatEachSlot;
                    } else if (head[2] != "once") {
                        throw ScenarioError("line " + std::to_string(line_no) + ": script mode must be once or repeat");
                    }
                }
            } else if (section == "broker") {
                broker_seen = true;
            } else if (section != "system" && section != "health" && section != "loads") {
                throw ScenarioError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
            }
            continue;
        }

        if (section == "system") {
            inline_xml += raw;
            inline_xml += '\n';
            continue;
        }
        if (section == "script") {
            script_text += raw;
            script_text += '\n';
            continue;
        }

        const std::string line = strip_comment(raw);
        if (line.empty()) {
            continue;
        }
        try {
            if (section == "loads") {
                sc.load_pairs.push_back(parse_load_pair(line));
                continue;
            }
            std::string key;
            std::string value;
            split_kv(line, key, value);

            if (section.empty()) {
                if (key == "name") {
                    sc.name = value;
                } else if (key == "mode") {
                    if (value == "partitioned") {
                        sc.mode = ScenarioMode::Partitioned;
                    } else if (value == "broker") {
                        sc.mode = ScenarioMode::Broker;
                    } else {
                        throw ScenarioError("mode must be partitioned or broker");
                    }
                } else if (key == "system") {
                    system_path = value;
                } else if (key == "repetitions") {
                    sc.repetitions = parse_u64(value, key);
                } else if (key == "payload_sizes") {
                    sc.payload_sizes.clear();
                    std::string list = value;
                    std::replace(list.begin(), list.end(), ',', ' ');
                    for (const auto& w : words(list)) {
                        sc.payload_sizes.push_back(parse_u64(w, key));
                    }
                } else if (key == "seed") {
                    sc.seed = parse_u64(value, key);
                } else if (key == "api_call_cost") {
                    sc.api_call_cost = parse_dur(value, key);
                } else if (key == "max_frames") {
                    sc.max_frames = parse_u64(value, key);
                } else if (key == "tx_label") {
                    sc.tx_label = value;
                } else if (key == "rx_label") {
                    sc.rx_label = value;
                } else {
                    throw ScenarioError("unknown key '" + key + "'");
                }
            } else if (section == "health") {
                const auto lhs = words(key);
                if (lhs.empty() || lhs.size() > 2) {
                    throw ScenarioError("health entry expects '<KIND> [partition] = <ACTION>'");
                }
                const auto kind = health_event_kind_from_string(lhs[0]);
                const auto action = health_action_from_string(value);
                if (!kind || !action) {
                    throw ScenarioError("unknown health kind or action in '" + line + "'");
                }
                if (lhs.size() == 1) {
                    sc.health_table.set_default(*kind, *action);
                } else {
                    sc.health_table.set(*kind, static_cast<PartitionId>(parse_u64(lhs[1], "health partition")),
                                        *action);
                }
            } else if (section == "broker") {
                const auto lhs = words(key);
                if (lhs.size() == 2 && lhs[0] == "downlink") {
                    const auto idx = parse_u64(lhs[1], "downlink index");
                    downlink_one[idx] = parse_link(value, 2 + idx, key);
                } else if (key == "subscribers") {
                    subscribers = parse_u64(value, key);
                } else if (key == "uplink") {
                    uplink = parse_link(value, 1, key);
                } else if (key == "downlink") {
                    downlink_all = parse_link(value, 2, key);
                } else if (key == "proc_fixed") {
                    topo.proc_fixed = parse_dur(value, key);
                } else if (key == "proc_per_byte") {
                    topo.proc_per_byte = parse_dur(value, key);
                } else if (key == "load_factor") {
                    topo.load_factor = parse_double(value, key);
                } else {
                    throw ScenarioError("unknown broker key '" + key + "'");
                }
            }
        } catch (const ScenarioError& e) {
            throw ScenarioError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    flush_script();

    if (system_path && !inline_xml.empty()) {
        throw ScenarioError("give either 'system = <file>' or a [system] section, not both");
    }
    try {
        if (system_path) {
            sc.system = parse_config(read_file(base_dir / *system_path));
        } else if (!inline_xml.empty()) {
            sc.system = parse_config(inline_xml);
        }
    } catch (const ConfigError& e) {
        throw ScenarioError(std::string{"system description: "} + e.what());
    }

    if (broker_seen || sc.mode == ScenarioMode::Broker) {
        const std::size_t n = subscribers.value_or(1);
        if (uplink) {
            topo.uplink = *uplink;
        }
        const auto defaults = default_topology(n);
        topo.downlinks.clear();
        for (std::size_t i = 0; i < n; ++i) {
            LinkModel link = defaults.downlinks[i];
            if (downlink_all) {
                link = *downlink_all;
                link.rng_seed = 2 + i;
            }
            if (auto it = downlink_one.find(i); it != downlink_one.end()) {
                link = it->second;
            }
            topo.downlinks.push_back(link);
        }
        for (const auto& [idx, link] : downlink_one) {
            if (idx >= n) {
                throw ScenarioError("downlink " + std::to_string(idx) + " beyond subscriber count");
            }
        }
        sc.broker = topo;
        if (sc.load_pairs.empty()) {
            sc.load_pairs.push_back(LoadPair{LoadProfile{0.0, 0.0},
                                             LoadProfile{calibration::kStressedCpuLoad,
                                                         calibration::kStressedMemoryLoad}});
        }
    }
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    return parse_scenario(read_file(path), path.parent_path());
}

ValidationReport validate_scenario(const Scenario& sc)
{
    ValidationReport report;
    auto error = [&report](std::string code, std::string location, std::string message) {
        report.push_back(Finding{std::move(code), Severity::Error, std::move(location), std::move(message)});
    };

    if (sc.repetitions < 1) {
        error("BAD_REPETITIONS", "Scenario", "repetitions must be at least 1");
    }
    if (sc.payload_sizes.empty()) {
        error("NO_PAYLOADS", "Scenario", "payload_sizes is empty");
    }
    for (const auto size : sc.payload_sizes) {
        if (size == 0) {
            error("ZERO_PAYLOAD", "Scenario", "payload sizes must be positive");
        }
    }

    if (sc.mode == ScenarioMode::Partitioned) {
        if (!sc.system) {
            error("NO_SYSTEM", "Scenario", "PARTITIONED scenario needs a system description");
            return report;
        }
        const auto& cfg = *sc.system;
        auto cfg_findings = validate(cfg);
        report.insert(report.end(), cfg_findings.begin(), cfg_findings.end());
        auto script_findings = validate_scripts(cfg, sc.scripts);
        report.insert(report.end(), script_findings.begin(), script_findings.end());

        bool has_tx = false;
        bool has_rx = false;
        for (const auto& script : sc.scripts) {
            for (std::size_t i = 0; i < script.actions.size(); ++i) {
                const auto& a = script.actions[i];
                if (a.kind == ActionKind::Mark) {
                    has_tx = has_tx || a.label == sc.tx_label;
                    has_rx = has_rx || a.label == sc.rx_label;
                }
                if (a.kind != ActionKind::Send || !a.size_from_payload) {
                    continue;
                }
                const auto ch = find_source_channel(cfg, PortRef{script.partition_id, a.port});
                if (!ch) {
                    continue;
                }
                for (const auto size : sc.payload_sizes) {
                    if (size > cfg.channels[*ch].max_message_size) {
                        error("PAYLOAD_TOO_LARGE",
                              "Script[partition=" + std::to_string(script.partition_id) + "]/Action[" +
                                  std::to_string(i) + "]",
                              "payload " + std::to_string(size) + " exceeds maxMessageSize " +
                                  std::to_string(cfg.channels[*ch].max_message_size));
                    }
                }
            }
        }
        if (!has_tx) {
            error("MISSING_MARK", "Scenario", "no script marks '" + sc.tx_label + "'");
        }
        if (!has_rx) {
            error("MISSING_MARK", "Scenario", "no script marks '" + sc.rx_label + "'");
        }
        if (sc.max_frames == 0) {
            error("BAD_MAX_FRAMES", "Scenario", "max_frames must be positive");
        }
    } else {
        if (!sc.broker) {
            error("NO_BROKER", "Scenario", "BROKER scenario needs a [broker] section");
            return report;
        }
        const auto& t = *sc.broker;
        if (t.downlinks.empty()) {
            error("NO_SUBSCRIBERS", "Broker", "at least one subscriber is required");
        }
        auto negative = [](const LinkModel& l) {
            return l.base_latency < Duration{0} || l.per_byte < Duration{0} || l.jitter_stddev < Duration{0};
        };
        bool bad_link = negative(t.uplink);
        for (const auto& l : t.downlinks) {
            bad_link = bad_link || negative(l);
        }
        if (bad_link || t.proc_fixed < Duration{0} || t.proc_per_byte < Duration{0} || t.load_factor < 0.0) {
            error("NEGATIVE_PARAMETER", "Broker", "link and processing parameters must be non-negative");
        }
        if (sc.load_pairs.empty()) {
            error("NO_LOAD_PAIRS", "Loads", "at least one load pair is required");
        }
        for (std::size_t i = 0; i < sc.load_pairs.size(); ++i) {
            if (!sc.load_pairs[i].relaxed.valid() || !sc.load_pairs[i].stressed.valid()) {
                error("LOAD_OUT_OF_RANGE", "Loads[" + std::to_string(i) + "]", "loads must lie in [0,1]");
            }
        }
    }
    return report;
}

}  // namespace partsim
