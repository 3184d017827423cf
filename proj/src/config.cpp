#include "filament/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "filament/grid.hpp"

namespace filament {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
    Config c;
    c.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw Error(origin + ":" + std::to_string(lineno) + ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw Error(origin + ":" + std::to_string(lineno) + ": expected key = value, got '" + t + "'");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        // Trailing comment after whitespace.
        for (const char* mark : {" #", "\t#"}) {
            const auto p = val.find(mark);
            if (p != std::string::npos) val = trim(val.substr(0, p));
        }
        if (val.size() >= 2 && val.front() == '"' && val.back() == '"') val = val.substr(1, val.size() - 2);
        if (key.empty()) throw Error(origin + ":" + std::to_string(lineno) + ": empty key");
        c.values_[section.empty() ? key : section + "." + key] = val;
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::optional<std::string> Config::raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& def) const {
    auto v = raw(key);
    return v ? *v : def;
}

double Config::get_double(const std::string& key, double def) const {
    auto v = raw(key);
    if (!v) return def;
    try {
        std::size_t pos = 0;
        const double d = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw Error("config key '" + key + "': expected a number, got '" + *v + "'");
    }
}

int Config::get_int(const std::string& key, int def) const {
    auto v = raw(key);
    if (!v) return def;
    try {
        std::size_t pos = 0;
        const int d = std::stoi(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw Error("config key '" + key + "': expected an integer, got '" + *v + "'");
    }
}

bool Config::get_bool(const std::string& key, bool def) const {
    auto v = raw(key);
    if (!v) return def;
    std::string s = *v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    throw Error("config key '" + key + "': expected a boolean, got '" + *v + "'");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& def) const {
    auto v = raw(key);
    if (!v) return def;
    std::vector<double> out;
    for (const auto& tok : split_list(*v)) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw Error("config key '" + key + "': bad number '" + tok + "'");
        }
    }
    return out;
}

std::vector<std::string> Config::get_strings(const std::string& key, const std::vector<std::string>& def) const {
    auto v = raw(key);
    if (!v) return def;
    return split_list(*v);
}

}  // namespace filament
