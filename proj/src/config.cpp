#include "partsim/config.hpp"

#include "xml_tree.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace partsim {

namespace {

using detail::XmlElement;

std::string where(const XmlElement& e)
{
    return "<" + e.name + "> (line " + std::to_string(e.line) + ")";
}

void require_only_attributes(const XmlElement& e, std::initializer_list<std::string_view> allowed)
{
    for (const auto& [key, value] : e.attributes) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw SchemaError("unknown attribute '" + key + "' on " + where(e));
        }
    }
}

void require_no_text(const XmlElement& e)
{
    if (e.text.find_first_not_of(" \t\r\n") != std::string::npos) {
        throw SchemaError("unexpected text content in " + where(e));
    }
}

std::string_view required(const XmlElement& e, std::string_view key)
{
    auto v = e.attribute(key);
    if (!v) {
        throw SchemaError("missing attribute '" + std::string{key} + "' on " + where(e));
    }
    return *v;
}

std::uint64_t parse_unsigned(const XmlElement& e, std::string_view key, std::string_view text)
{
    const std::string shown{text};
    if (!text.empty() && text.front() == '-') {
        throw RangeError("negative value '" + shown + "' for " + std::string{key} + " on " + where(e));
    }
    int base = 10;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        base = 16;
        text.remove_prefix(2);
    }
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
    if (ec == std::errc::result_out_of_range) {
        throw RangeError("value '" + shown + "' for " + std::string{key} + " out of range on " + where(e));
    }
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw SchemaError("malformed integer '" + shown + "' for " + std::string{key} + " on " + where(e));
    }
    return value;
}

std::uint64_t unsigned_attr(const XmlElement& e, std::string_view key)
{
    return parse_unsigned(e, key, required(e, key));
}

std::uint64_t positive_attr(const XmlElement& e, std::string_view key)
{
    const auto v = unsigned_attr(e, key);
    if (v == 0) {
        throw RangeError("'" + std::string{key} + "' must be positive on " + where(e));
    }
    return v;
}

int id_attr(const XmlElement& e, std::string_view key)
{
    const auto v = unsigned_attr(e, key);
    if (v > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
        throw RangeError("identifier '" + std::string{key} + "' out of range on " + where(e));
    }
    return static_cast<int>(v);
}

Duration duration_value(const XmlElement& e, std::string_view key, std::string_view text)
{
    try {
        return parse_duration(text);
    } catch (const DurationFormatError& err) {
        const std::string msg = std::string{err.what()} + " for " + std::string{key} + " on " + where(e);
        switch (err.kind()) {
        case DurationParseError::Negative:
        case DurationParseError::Overflow:
            throw RangeError(msg);
        case DurationParseError::BadSyntax:
        case DurationParseError::BadUnit:
            break;
        }
        throw SchemaError(msg);
    }
}

Duration duration_attr(const XmlElement& e, std::string_view key)
{
    return duration_value(e, key, required(e, key));
}

PortRef port_ref(const XmlElement& e)
{
    require_only_attributes(e, {"partition", "port"});
    require_no_text(e);
    if (!e.children.empty()) {
        throw SchemaError("unexpected child element in " + where(e));
    }
    const auto name = required(e, "port");
    if (name.empty()) {
        throw SchemaError("empty port name on " + where(e));
    }
    return PortRef{id_attr(e, "partition"), std::string{name}};
}

PartitionSpec parse_partition(const XmlElement& e)
{
    require_only_attributes(e, {"id", "name"});
    require_no_text(e);
    PartitionSpec p;
    p.id = id_attr(e, "id");
    p.name = std::string{required(e, "name")};
    for (const auto& child : e.children) {
        if (child->name != "MemoryArea") {
            throw SchemaError("unknown element " + where(*child) + " in <Partition>");
        }
        require_only_attributes(*child, {"start", "size"});
        require_no_text(*child);
        if (!child->children.empty()) {
            throw SchemaError("unexpected child element in " + where(*child));
        }
        p.memory_areas.push_back(MemoryArea{unsigned_attr(*child, "start"), positive_attr(*child, "size")});
    }
    return p;
}

ScheduleSlot parse_slot(const XmlElement& e)
{
    require_only_attributes(e, {"id", "partition", "start", "duration"});
    require_no_text(e);
    if (!e.children.empty()) {
        throw SchemaError("unexpected child element in " + where(e));
    }
    ScheduleSlot s;
    s.slot_id = id_attr(e, "id");
    s.partition_id = id_attr(e, "partition");
    s.start = duration_attr(e, "start");
    s.duration = duration_attr(e, "duration");
    return s;
}

ChannelSpec parse_channel(const XmlElement& e)
{
    ChannelSpec c;
    if (e.name == "SamplingChannel") {
        require_only_attributes(e, {"maxMessageSize", "refreshPeriod"});
        c.kind = ChannelKind::Sampling;
        c.refresh_period = duration_attr(e, "refreshPeriod");
    } else {
        require_only_attributes(e, {"maxMessageSize", "maxNoMessages"});
        c.kind = ChannelKind::Queuing;
        c.capacity = positive_attr(e, "maxNoMessages");
    }
    c.max_message_size = positive_attr(e, "maxMessageSize");
    require_no_text(e);

    bool have_source = false;
    for (const auto& child : e.children) {
        if (child->name == "Source") {
            if (have_source) {
                throw SchemaError("more than one <Source> in " + where(e));
            }
            c.source = port_ref(*child);
            have_source = true;
        } else if (child->name == "Destination") {
            c.destinations.push_back(port_ref(*child));
        } else {
            throw SchemaError("unknown element " + where(*child) + " in " + where(e));
        }
    }
    if (!have_source) {
        throw SchemaError("missing <Source> in " + where(e));
    }
    return c;
}

std::string xml_escape(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += ch;
        }
    }
    return out;
}

std::string hex(std::uint64_t v)
{
    std::ostringstream os;
    os << "0x" << std::hex << v;
    return os.str();
}

std::string slot_location(const ScheduleSlot& s)
{
    return "Slot[id=" + std::to_string(s.slot_id) + "]";
}

std::string channel_location(std::size_t index)
{
    return "Channel[" + std::to_string(index) + "]";
}

}  // namespace

const ScheduleSlot* SchedulePlan::find_slot(SlotId id) const
{
    const auto it = std::find_if(slots.begin(), slots.end(), [id](const ScheduleSlot& s) { return s.slot_id == id; });
    return it == slots.end() ? nullptr : &*it;
}

const PartitionSpec* SystemConfig::find_partition(PartitionId id) const
{
    const auto it =
        std::find_if(partitions.begin(), partitions.end(), [id](const PartitionSpec& p) { return p.id == id; });
    return it == partitions.end() ? nullptr : &*it;
}

std::string_view to_string(ChannelKind kind)
{
    return kind == ChannelKind::Sampling ? "SAMPLING" : "QUEUING";
}

SystemConfig parse_config(std::string_view xml_text)
{
    const auto root = detail::parse_xml(xml_text);
    if (root->name != "SystemDescription") {
        throw SchemaError("root element must be <SystemDescription>, found " + where(*root));
    }
    require_only_attributes(*root, {"majorFrame"});
    require_no_text(*root);

    SystemConfig cfg;
    cfg.plan.major_frame = duration_attr(*root, "majorFrame");

    std::set<std::string> seen;
    for (const auto& section : root->children) {
        if (!seen.insert(section->name).second) {
            throw SchemaError("duplicate section " + where(*section));
        }
        require_no_text(*section);
        if (section->name == "PartitionTable") {
            require_only_attributes(*section, {});
            for (const auto& child : section->children) {
                if (child->name != "Partition") {
                    throw SchemaError("unknown element " + where(*child) + " in <PartitionTable>");
                }
                cfg.partitions.push_back(parse_partition(*child));
            }
        } else if (section->name == "Schedule") {
            require_only_attributes(*section, {});
            for (const auto& child : section->children) {
                if (child->name != "Slot") {
                    throw SchemaError("unknown element " + where(*child) + " in <Schedule>");
                }
                cfg.plan.slots.push_back(parse_slot(*child));
            }
        } else if (section->name == "Channels") {
            require_only_attributes(*section, {});
            for (const auto& child : section->children) {
                if (child->name != "SamplingChannel" && child->name != "QueuingChannel") {
                    throw SchemaError("unknown element " + where(*child) + " in <Channels>");
                }
                cfg.channels.push_back(parse_channel(*child));
            }
        } else if (section->name == "Hypervisor") {
            require_only_attributes(*section, {"copyCostFixed", "copyCostPerByte"});
            if (!section->children.empty()) {
                throw SchemaError("unexpected child element in " + where(*section));
            }
            if (auto v = section->attribute("copyCostFixed")) {
                cfg.hypervisor_copy_cost.fixed = duration_value(*section, "copyCostFixed", *v);
            }
            if (auto v = section->attribute("copyCostPerByte")) {
                cfg.hypervisor_copy_cost.per_byte = duration_value(*section, "copyCostPerByte", *v);
            }
        } else {
            throw SchemaError("unknown element " + where(*section) + " in <SystemDescription>");
        }
    }
    for (const char* mandatory : {"PartitionTable", "Schedule"}) {
        if (seen.count(mandatory) == 0) {
            throw SchemaError(std::string{"missing <"} + mandatory + "> section");
        }
    }

    std::stable_sort(cfg.plan.slots.begin(), cfg.plan.slots.end(),
                     [](const ScheduleSlot& a, const ScheduleSlot& b) { return a.start < b.start; });
    return cfg;
}

std::string serialize_config(const SystemConfig& cfg)
{
    std::ostringstream os;
    os << "<SystemDescription majorFrame=\"" << format_duration(cfg.plan.major_frame) << "\">\n";
    os << "  <PartitionTable>\n";
    for (const auto& p : cfg.partitions) {
        os << "    <Partition id=\"" << p.id << "\" name=\"" << xml_escape(p.name) << "\"";
        if (p.memory_areas.empty()) {
            os << "/>\n";
            continue;
        }
        os << ">\n";
        for (const auto& m : p.memory_areas) {
            os << "      <MemoryArea start=\"" << hex(m.start) << "\" size=\"" << hex(m.size) << "\"/>\n";
        }
        os << "    </Partition>\n";
    }
    os << "  </PartitionTable>\n";
    os << "  <Schedule>\n";
    for (const auto& s : cfg.plan.slots) {
        os << "    <Slot id=\"" << s.slot_id << "\" partition=\"" << s.partition_id << "\" start=\""
           << format_duration(s.start) << "\" duration=\"" << format_duration(s.duration) << "\"/>\n";
    }
    os << "  </Schedule>\n";
    if (!cfg.channels.empty()) {
        os << "  <Channels>\n";
        for (const auto& c : cfg.channels) {
            const char* tag = c.kind == ChannelKind::Sampling ? "SamplingChannel" : "QueuingChannel";
            os << "    <" << tag << " maxMessageSize=\"" << c.max_message_size << "\"";
            if (c.kind == ChannelKind::Sampling) {
                os << " refreshPeriod=\"" << format_duration(c.refresh_period) << "\">\n";
            } else {
                os << " maxNoMessages=\"" << c.capacity << "\">\n";
            }
            os << "      <Source partition=\"" << c.source.partition << "\" port=\"" << xml_escape(c.source.port)
               << "\"/>\n";
            for (const auto& d : c.destinations) {
                os << "      <Destination partition=\"" << d.partition << "\" port=\"" << xml_escape(d.port)
                   << "\"/>\n";
            }
            os << "    </" << tag << ">\n";
        }
        os << "  </Channels>\n";
    }
    os << "  <Hypervisor copyCostFixed=\"" << format_duration(cfg.hypervisor_copy_cost.fixed)
       << "\" copyCostPerByte=\"" << format_duration(cfg.hypervisor_copy_cost.per_byte) << "\"/>\n";
    os << "</SystemDescription>\n";
    return os.str();
}

ValidationReport validate(const SystemConfig& cfg)
{
    ValidationReport report;
    auto error = [&report](std::string code, std::string location, std::string message) {
        report.push_back(Finding{std::move(code), Severity::Error, std::move(location), std::move(message)});
    };

    // Partitions and memory.
    if (cfg.partitions.empty()) {
        error("NO_PARTITIONS", "PartitionTable", "partition table is empty");
    }
    std::set<PartitionId> ids;
    for (const auto& p : cfg.partitions) {
        const std::string loc = "Partition[id=" + std::to_string(p.id) + "]";
        if (p.id < 0) {
            error("BAD_PARTITION_ID", loc, "partition id must be non-negative");
        }
        if (!ids.insert(p.id).second) {
            error("DUPLICATE_PARTITION_ID", loc, "partition id used more than once");
        }
        for (std::size_t i = 0; i < p.memory_areas.size(); ++i) {
            const auto& m = p.memory_areas[i];
            const std::string mloc = loc + "/MemoryArea[" + std::to_string(i) + "]";
            if (m.size == 0) {
                error("MEMORY_ZERO_SIZE", mloc, "memory area size must be positive");
            } else if (m.start > std::numeric_limits<std::uint64_t>::max() - m.size) {
                error("MEMORY_OVERFLOW", mloc, "start + size overflows the address space");
            }
        }
    }
    for (std::size_t a = 0; a < cfg.partitions.size(); ++a) {
        for (std::size_t b = a + 1; b < cfg.partitions.size(); ++b) {
            const auto& pa = cfg.partitions[a];
            const auto& pb = cfg.partitions[b];
            if (pa.id == pb.id) {
                continue;
            }
            for (const auto& ma : pa.memory_areas) {
                for (const auto& mb : pb.memory_areas) {
                    if (ma.size == 0 || mb.size == 0) {
                        continue;
                    }
                    // Saturating ends keep overflowing areas comparable.
                    const auto end_a = ma.start > std::numeric_limits<std::uint64_t>::max() - ma.size
                                           ? std::numeric_limits<std::uint64_t>::max()
                                           : ma.end();
                    const auto end_b = mb.start > std::numeric_limits<std::uint64_t>::max() - mb.size
                                           ? std::numeric_limits<std::uint64_t>::max()
                                           : mb.end();
                    if (ma.start < end_b && mb.start < end_a) {
                        error("MEMORY_OVERLAP",
                              "Partition[id=" + std::to_string(pa.id) + "]",
                              "memory [" + hex(ma.start) + "," + hex(end_a) + ") overlaps partition " +
                                  std::to_string(pb.id) + " memory [" + hex(mb.start) + "," + hex(end_b) + ")");
                    }
                }
            }
        }
    }

    // Schedule.
    const auto& plan = cfg.plan;
    if (plan.major_frame <= Duration{0}) {
        error("ZERO_MAJOR_FRAME", "SystemDescription", "major frame must be positive");
    }
    if (cfg.hypervisor_copy_cost.fixed < Duration{0} || cfg.hypervisor_copy_cost.per_byte < Duration{0}) {
        error("NEGATIVE_DURATION", "Hypervisor", "copy cost must be non-negative");
    }
    std::set<SlotId> slot_ids;
    for (const auto& s : plan.slots) {
        const auto loc = slot_location(s);
        if (!slot_ids.insert(s.slot_id).second) {
            error("DUPLICATE_SLOT_ID", loc, "slot id used more than once");
        }
        if (ids.count(s.partition_id) == 0) {
            error("SLOT_UNKNOWN_PARTITION", loc, "slot refers to unknown partition " + std::to_string(s.partition_id));
        }
        if (s.duration <= Duration{0}) {
            error("SLOT_ZERO_DURATION", loc, "slot duration must be positive");
        } else if (s.start < Duration{0} || s.end() > plan.major_frame) {
            error("SLOT_OUT_OF_FRAME", loc,
                  "slot [" + format_duration(s.start) + "," + format_duration(s.end()) +
                      ") does not fit in major frame " + format_duration(plan.major_frame));
        }
    }
    for (std::size_t a = 0; a < plan.slots.size(); ++a) {
        for (std::size_t b = a + 1; b < plan.slots.size(); ++b) {
            const auto& sa = plan.slots[a];
            const auto& sb = plan.slots[b];
            if (sa.duration <= Duration{0} || sb.duration <= Duration{0}) {
                continue;
            }
            if (sa.start < sb.end() && sb.start < sa.end()) {
                error("SLOT_OVERLAP", slot_location(sa), "overlaps " + slot_location(sb));
            }
        }
    }

    // Channels.
    std::map<PortRef, std::size_t> port_owner;
    for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
        const auto& c = cfg.channels[i];
        const auto loc = channel_location(i);
        if (c.max_message_size == 0) {
            error("ZERO_MESSAGE_SIZE", loc, "maxMessageSize must be positive");
        }
        if (c.kind == ChannelKind::Queuing && c.capacity == 0) {
            error("ZERO_CAPACITY", loc, "maxNoMessages must be positive");
        }
        if (c.kind == ChannelKind::Sampling && c.refresh_period < Duration{0}) {
            error("NEGATIVE_DURATION", loc, "refreshPeriod must be non-negative");
        }
        if (c.destinations.empty()) {
            error("NO_DESTINATION", loc, "channel has no destination port");
        }
        if (c.kind == ChannelKind::Queuing && c.destinations.size() > 1) {
            error("QUEUING_FANOUT", loc, "queuing channel must have exactly one destination");
        }
        std::vector<const PortRef*> endpoints{&c.source};
        for (const auto& d : c.destinations) {
            endpoints.push_back(&d);
        }
        for (const PortRef* ep : endpoints) {
            if (ids.count(ep->partition) == 0) {
                error("DANGLING_PORT", loc,
                      "port '" + ep->port + "' names nonexistent partition " + std::to_string(ep->partition));
            }
            auto [it, inserted] = port_owner.emplace(*ep, i);
            if (!inserted && it->second != i) {
                error("DUPLICATE_PORT", loc,
                      "port " + std::to_string(ep->partition) + ":" + ep->port + " already used by " +
                          channel_location(it->second));
            }
        }
        for (const auto& d : c.destinations) {
            if (d == c.source) {
                error("SELF_LOOP", loc, "source port is also a destination");
            }
        }
        for (std::size_t a = 0; a < c.destinations.size(); ++a) {
            for (std::size_t b = a + 1; b < c.destinations.size(); ++b) {
                if (c.destinations[a] == c.destinations[b]) {
                    error("DUPLICATE_PORT", loc, "destination listed twice");
                }
            }
        }
    }
    return report;
}

std::string format_finding(const Finding& f)
{
    return std::string{f.severity == Severity::Error ? "ERROR" : "WARNING"} + " " + f.code + " " + f.location + " " +
           f.message;
}

Duration transition_gap(const SchedulePlan& plan, SlotId from_slot, SlotId to_slot)
{
    const auto* from = plan.find_slot(from_slot);
    const auto* to = plan.find_slot(to_slot);
    if (from == nullptr || to == nullptr) {
        throw UnknownSlot("transition_gap: unknown slot " + std::to_string(from == nullptr ? from_slot : to_slot));
    }
    if (from_slot == to_slot) {
        throw std::invalid_argument("transition_gap: from_slot and to_slot must differ");
    }
    const auto frame = plan.major_frame.count();
    auto gap = (to->start.count() - from->end().count()) % frame;
    if (gap < 0) {
        gap += frame;
    }
    return Duration{gap};
}

}  // namespace partsim
