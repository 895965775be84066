#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace metrolab {

// Minimal key-value config format: one `key = value` per line, `#` comments,
// order-insensitive. Parsing then writing then parsing again yields the same
// mapping (round-trip contract).
class KeyValueConfig {
  public:
    KeyValueConfig() = default;

    static KeyValueConfig parse(std::istream& is);
    static KeyValueConfig parse_file(const std::string& path);
    void write(std::ostream& os) const;

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    unsigned long long get_u64(const std::string& key, unsigned long long fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;

    const std::map<std::string, std::string>& items() const { return values_; }

    bool operator==(const KeyValueConfig& other) const { return values_ == other.values_; }

  private:
    std::map<std::string, std::string> values_;
};

}  // namespace metrolab
