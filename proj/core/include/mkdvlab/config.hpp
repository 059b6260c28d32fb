#pragma once

#include <map>
#include <optional>
#include <string>

namespace mkdv {

/// Flat key-value configuration with dotted keys (grid.n = 2048). Lines
/// starting with '#' and blank lines are skipped; values keep everything
/// after the first '=' stripped of surrounding whitespace.
class KeyValueConfig {
public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_string(const std::string& text);

    bool has(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    void set(const std::string& key, const std::string& value);
    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

} // namespace mkdv
