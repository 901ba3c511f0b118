#include "mkc/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "mkc/errors.hpp"

namespace mkc {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

ConfigMap ConfigMap::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open config file");
    return parse(in, path);
}

ConfigMap ConfigMap::parse(std::istream& in, const std::string& origin) {
    ConfigMap cfg;
    cfg.origin_ = origin;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected `key = value`, got `" + line + "`");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (cfg.values_.count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": duplicate key `" + key + "`");
        cfg.values_[key] = value;
    }
    return cfg;
}

bool ConfigMap::has(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return false;
    touched_[key] = true;
    return true;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
    values_[key] = value;
    touched_[key] = true;
}

std::string ConfigMap::get_str(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    touched_[key] = true;
    return it->second;
}

double ConfigMap::parse_double(const std::string& key, const std::string& raw) const {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(raw, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != raw.size() || raw.empty())
        throw ConfigError(origin_ + ": key `" + key + "`: `" + raw + "` is not a number");
    return v;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    touched_[key] = true;
    return parse_double(key, it->second);
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    touched_[key] = true;
    const double v = parse_double(key, it->second);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw ConfigError(origin_ + ": key `" + key + "`: expected an integer");
    return i;
}

std::uint64_t ConfigMap::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    touched_[key] = true;
    const std::string raw = trim(it->second);
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(raw, &pos);
        if (pos != raw.size() || raw.empty()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key `" + key + "`: `" + raw +
                          "` is not an unsigned integer");
    }
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    touched_[key] = true;
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(origin_ + ": key `" + key + "`: `" + it->second +
                      "` is not a boolean");
}

std::vector<double> ConfigMap::get_list(const std::string& key,
                                        const std::vector<double>& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    touched_[key] = true;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string field;
    while (std::getline(ss, field, ',')) {
        field = trim(field);
        if (field.empty())
            throw ConfigError(origin_ + ": key `" + key + "`: empty list element");
        out.push_back(parse_double(key, field));
    }
    if (out.empty())
        throw ConfigError(origin_ + ": key `" + key + "`: empty list");
    return out;
}

std::vector<std::string> ConfigMap::untouched_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_) {
        (void)value;
        if (!touched_.count(key)) out.push_back(key);
    }
    return out;
}

}  // namespace mkc
