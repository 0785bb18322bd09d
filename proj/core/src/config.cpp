#include "cbfed/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cbfed/errors.hpp"

namespace cbfed {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool valid_key(const std::string& key) {
    if (key.empty()) return false;
    for (char ch : key)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '_'))
            return false;
    return true;
}

} // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw BadConfig(origin + ":" + std::to_string(lineno) +
                            ": expected `key = value`");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (!valid_key(key))
            throw BadConfig(origin + ":" + std::to_string(lineno) + ": bad key `" +
                            key + "`");
        if (value.empty())
            throw BadConfig(origin + ":" + std::to_string(lineno) +
                            ": empty value for `" + key + "`");
        if (cfg.entries_.count(key))
            throw BadConfig(origin + ":" + std::to_string(lineno) +
                            ": duplicate key `" + key + "`");
        cfg.entries_[key] = Entry{value, lineno, false};
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BadConfig("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

const Config::Entry* Config::find(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.consumed = true;
    return &it->second;
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
    const Entry* e = find(key);
    return e ? e->value : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    char* end = nullptr;
    const double v = std::strtod(e->value.c_str(), &end);
    if (end == e->value.c_str() || *end != '\0')
        throw BadConfig(origin_ + ":" + std::to_string(e->line) + ": `" + key +
                        "` is not a number: " + e->value);
    return v;
}

int Config::get_int(const std::string& key, int fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    char* end = nullptr;
    const long v = std::strtol(e->value.c_str(), &end, 10);
    if (end == e->value.c_str() || *end != '\0')
        throw BadConfig(origin_ + ":" + std::to_string(e->line) + ": `" + key +
                        "` is not an integer: " + e->value);
    return static_cast<int>(v);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1") return true;
    if (e->value == "false" || e->value == "0") return false;
    throw BadConfig(origin_ + ":" + std::to_string(e->line) + ": `" + key +
                    "` is not a boolean: " + e->value);
}

std::string Config::require_string(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) throw BadConfig(origin_ + ": missing required key `" + key + "`");
    return e->value;
}

double Config::require_double(const std::string& key) const {
    if (!has(key)) throw BadConfig(origin_ + ": missing required key `" + key + "`");
    return get_double(key, 0.0);
}

void Config::check_consumed() const {
    for (const auto& [key, e] : entries_)
        if (!e.consumed)
            throw BadConfig(origin_ + ":" + std::to_string(e.line) +
                            ": unknown key `" + key + "`");
}

std::vector<std::string> Config::keys() const {
    std::vector<std::string> out;
    for (const auto& [key, e] : entries_) out.push_back(key);
    return out;
}

} // namespace cbfed
