#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace skewdiff {

/// Flat sectioned key-value document:
///
///     # comment
///     [medium]
///     d_plus = 4
///     lambda = 0.5
///
/// Keys are unique per section; values are raw strings, lists are whitespace-separated.
class ConfigDoc {
public:
    using Section = std::map<std::string, std::string>;

    /// Throws ConfigError with the offending line number on malformed input.
    static ConfigDoc parse(std::string_view text);
    static ConfigDoc load(const std::filesystem::path& path);

    bool has(const std::string& section, const std::string& key) const;
    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key, std::string value);

    double get_double(const std::string& section, const std::string& key, double fallback) const;
    double require_double(const std::string& section, const std::string& key) const;
    long long get_int(const std::string& section, const std::string& key, long long fallback) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key) const;

    /// Throws ConfigError naming the first section or key not listed in `allowed`.
    void reject_unknown(const std::map<std::string, std::set<std::string>>& allowed) const;

    const std::map<std::string, Section>& sections() const noexcept { return sections_; }

private:
    std::map<std::string, Section> sections_;
};

/// Full-precision parse of a whole string as a double; throws ConfigError naming `what`.
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

/// Parses `lo:hi:step` into lo, lo+step, ..., up to hi (inclusive within step/1e6).
std::vector<double> parse_range(std::string_view text, std::string_view what);

}  // namespace skewdiff
