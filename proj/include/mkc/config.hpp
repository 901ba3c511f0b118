#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace mkc {

// Flat `key = value` text config ('#' starts a comment). Every key is
// optional; callers supply defaults at lookup time. Lookups are recorded so
// unknown (likely misspelled) keys can be reported after parsing.
class ConfigMap {
  public:
    ConfigMap() = default;

    static ConfigMap load(const std::string& path);
    static ConfigMap parse(std::istream& in, const std::string& origin);

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);

    std::string get_str(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    // Comma-separated list of reals, e.g. "0.5, 1.5".
    std::vector<double> get_list(const std::string& key,
                                 const std::vector<double>& fallback) const;

    // Keys present in the file but never looked up; used to reject typos.
    std::vector<std::string> untouched_keys() const;

  private:
    double parse_double(const std::string& key, const std::string& raw) const;

    std::map<std::string, std::string> values_;
    mutable std::map<std::string, bool> touched_;
    std::string origin_ = "<inline>";
};

}  // namespace mkc
