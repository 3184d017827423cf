#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace filament {

// Flat key=value store. Files may group keys under [section] headers, which
// prefix the keys as "section.key"; dotted keys can also be written directly.
// Lines starting with '#' or ';' are comments.
class Config {
public:
    static Config parse(const std::string& text, const std::string& origin = "<string>");
    static Config load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;
    std::optional<std::string> raw(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& def) const;
    double get_double(const std::string& key, double def) const;
    int get_int(const std::string& key, int def) const;
    bool get_bool(const std::string& key, bool def) const;
    // Comma or whitespace separated list.
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& def) const;
    std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& def) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::string origin_;
};

}  // namespace filament
