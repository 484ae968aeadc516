#include "bevmotion/kv.hpp"

#include <cstdio>
#include <cstdlib>

#include "bevmotion/error.hpp"

namespace bevmotion {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) {
        return "";
    }
    return s.substr(a, b - a + 1);
}

}  // namespace

std::string format_double(double value) {
    // %.17g always round-trips; prefer the shorter %.15g when it does too.
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g", value);
    if (std::strtod(buf, nullptr) == value) {
        return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

KvMap KvMap::parse(const std::string& text) {
    KvMap map;
    size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string::npos) {
            end = text.size();
        }
        ++line_no;
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        const size_t comment = line.find('#');
        if (comment != std::string::npos) {
            line = line.substr(0, comment);
        }
        line = trim(line);
        if (line.empty()) {
            if (pos > text.size()) break;
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            raise(ErrorKind::config,
                  "line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            raise(ErrorKind::config, "line " + std::to_string(line_no) + ": empty key");
        }
        map.set(key, value);
        if (pos > text.size()) break;
    }
    return map;
}

void KvMap::set(const std::string& key, const std::string& value) {
    for (auto& entry : entries_) {
        if (entry.first == key) {
            entry.second = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void KvMap::set_double(const std::string& key, double value) {
    set(key, format_double(value));
}

void KvMap::set_int(const std::string& key, int64_t value) {
    set(key, std::to_string(value));
}

void KvMap::set_bool(const std::string& key, bool value) {
    set(key, value ? "true" : "false");
}

bool KvMap::contains(const std::string& key) const {
    for (const auto& entry : entries_) {
        if (entry.first == key) {
            return true;
        }
    }
    return false;
}

std::optional<std::string> KvMap::get(const std::string& key) const {
    for (const auto& entry : entries_) {
        if (entry.first == key) {
            return entry.second;
        }
    }
    return std::nullopt;
}

std::string KvMap::get_string(const std::string& key) const {
    auto v = get(key);
    if (!v) {
        raise(ErrorKind::config, "missing key: " + key);
    }
    return *v;
}

double KvMap::get_double(const std::string& key) const {
    const std::string v = get_string(key);
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') {
        raise(ErrorKind::config, "key " + key + ": not a number: " + v);
    }
    return out;
}

int64_t KvMap::get_int(const std::string& key) const {
    const std::string v = get_string(key);
    char* end = nullptr;
    const long long out = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') {
        raise(ErrorKind::config, "key " + key + ": not an integer: " + v);
    }
    return out;
}

bool KvMap::get_bool(const std::string& key) const {
    const std::string v = get_string(key);
    if (v == "true" || v == "1") {
        return true;
    }
    if (v == "false" || v == "0") {
        return false;
    }
    raise(ErrorKind::config, "key " + key + ": not a boolean: " + v);
}

std::string KvMap::serialize() const {
    std::string out;
    for (const auto& entry : entries_) {
        out += entry.first;
        out += " = ";
        out += entry.second;
        out += "\n";
    }
    return out;
}

}  // namespace bevmotion
