#pragma once

#include "partsim/config.hpp"
#include "partsim/harness.hpp"
#include "partsim/scheduler.hpp"

#include <filesystem>
#include <string>

#include <unistd.h>

namespace partsim::test {

inline std::filesystem::path scenario_dir()
{
    return PARTSIM_SCENARIO_DIR;
}

inline SystemConfig cookbook_config()
{
    return parse_config(read_file(scenario_dir() / "cookbook.xml"));
}

inline Scenario cookbook_scenario()
{
    return load_scenario(scenario_dir() / "cookbook_partitioned.scn");
}

// Config with one channel between partition 0 (port "out") and partition 1
// (port "in"), on the cookbook schedule.
inline SystemConfig two_partition_config(ChannelKind kind, std::uint64_t capacity = 16,
                                         Duration refresh = Duration{2'000'000})
{
    SystemConfig cfg = cookbook_config();
    cfg.channels.clear();
    ChannelSpec c;
    c.kind = kind;
    c.source = PortRef{0, "out"};
    c.destinations = {PortRef{1, "in"}};
    c.max_message_size = 1024;
    c.capacity = kind == ChannelKind::Queuing ? capacity : 0;
    c.refresh_period = kind == ChannelKind::Sampling ? refresh : Duration{0};
    cfg.channels.push_back(c);
    return cfg;
}

// A fresh temporary directory removed on destruction.
class TempDir {
public:
    TempDir()
    {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("partsim-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace partsim::test
