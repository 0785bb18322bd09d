#pragma once

#include <map>
#include <string>
#include <vector>

namespace cbfed {

/// Flat `key = value` configuration with `#` comments and dotted keys.
/// Typed getters mark keys as consumed; `check_consumed` turns any leftover
/// (unknown) key into a BadConfig carrying its line number.
class Config {
  public:
    Config() = default;

    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text,
                               const std::string& origin = "<string>");

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Required variants: BadConfig when the key is missing.
    std::string require_string(const std::string& key) const;
    double require_double(const std::string& key) const;

    /// Throws BadConfig naming the first never-consumed key and its line.
    void check_consumed() const;

    std::vector<std::string> keys() const;

  private:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool consumed = false;
    };
    std::map<std::string, Entry> entries_;
    std::string origin_;

    const Entry* find(const std::string& key) const;
};

} // namespace cbfed
