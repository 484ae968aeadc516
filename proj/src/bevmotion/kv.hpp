#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bevmotion {

// Line-oriented "key = value" text with '#' comments. Used by config files,
// dataset manifests and machine-readable reports. Keys keep insertion order
// so serialized output is stable.
class KvMap {
public:
    static KvMap parse(const std::string& text);

    void set(const std::string& key, const std::string& value);
    void set_double(const std::string& key, double value);   // round-trip exact
    void set_int(const std::string& key, int64_t value);
    void set_bool(const std::string& key, bool value);

    bool contains(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;

    // Typed getters raise config errors on missing keys or bad values.
    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    int64_t get_int(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

    std::string serialize() const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::string format_double(double value);  // shortest exact representation

}  // namespace bevmotion
