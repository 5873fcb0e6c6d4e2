#include "nsd/kvconfig.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "nsd/error.hpp"

namespace nsd {

namespace {
std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}
}  // namespace

KvConfig KvConfig::parse(const std::string& text) {
    KvConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno), "expected key = value");
        auto key = trim(line.substr(0, eq));
        auto val = trim(line.substr(eq + 1));
        if (key.empty()) throw ValidationError("config line " + std::to_string(lineno), "empty key");
        cfg.values_[key] = val;
    }
    return cfg;
}

KvConfig KvConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("config path", "cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

std::optional<std::string> KvConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

double KvConfig::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        double d = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ValidationError(key, "not a number: '" + *v + "'");
    }
}

std::uint64_t KvConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        auto u = std::stoull(*v, &pos, 0);
        if (pos != v->size() || (*v)[0] == '-') throw std::invalid_argument("bad");
        return u;
    } catch (const std::exception&) {
        throw ValidationError(key, "not an unsigned integer: '" + *v + "'");
    }
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    std::string s = *v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    throw ValidationError(key, "not a boolean: '" + *v + "'");
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

void KvConfig::require_known(const std::vector<std::string>& allowed) const {
    for (const auto& [k, v] : values_) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw ValidationError(k, "unknown configuration key");
    }
}

}  // namespace nsd
