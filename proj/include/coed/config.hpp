#pragma once

#include <map>
#include <string>

#include "coed/core.hpp"

namespace coed {

// Line-oriented "[section]" + "key = value" config. Every key must be
// consumed by the reader; leftovers are reported as unknown-key errors so
// typos never pass silently.
class Config {
public:
    Config() = default;

    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin = "<string>");

    // Programmatic override before reading (CLI flags beat file values).
    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback);
    long get_int(const std::string& key, long fallback);
    uint64_t get_u64(const std::string& key, uint64_t fallback);
    double get_double(const std::string& key, double fallback);
    bool get_bool(const std::string& key, bool fallback);

    // Throws ConfigError naming every key that was never consumed.
    void check_consumed() const;

    // The resolved "section.key = value" lines, sorted; embedded in reports
    // so a run can be reproduced from its own artifacts.
    std::string resolved() const;

private:
    std::string take(const std::string& key);

    std::map<std::string, std::string> values_;  // "section.key" -> value
    std::map<std::string, bool> consumed_;
};

}  // namespace coed
