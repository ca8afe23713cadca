#include "skewdiff/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "skewdiff/error.hpp"
#include "skewdiff/io.hpp"

namespace skewdiff {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_name(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    return true;
}

}  // namespace

double parse_double(std::string_view text, std::string_view what) {
    text = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v))
        throw ConfigError("invalid number for " + std::string(what) + ": '" + std::string(text) + "'");
    return v;
}

long long parse_int(std::string_view text, std::string_view what) {
    text = trim(text);
    long long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ConfigError("invalid integer for " + std::string(what) + ": '" + std::string(text) + "'");
    return v;
}

std::vector<double> parse_range(std::string_view text, std::string_view what) {
    const auto c1 = text.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw ConfigError(std::string(what) + " must have the form lo:hi:step");
    const double lo = parse_double(text.substr(0, c1), what);
    const double hi = parse_double(text.substr(c1 + 1, c2 - c1 - 1), what);
    const double step = parse_double(text.substr(c2 + 1), what);
    if (!(step > 0.0) || hi < lo) throw ConfigError(std::string(what) + " needs lo <= hi and step > 0");
    const double count = std::floor((hi - lo) / step + 1e-6);
    if (count > 1e8) throw ConfigError(std::string(what) + " has too many points");
    std::vector<double> out;
    for (long long k = 0; k <= static_cast<long long>(count); ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
}

ConfigDoc ConfigDoc::parse(std::string_view text) {
    ConfigDoc doc;
    std::string current;
    bool in_section = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto where = "line " + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (!valid_name(current)) throw ConfigError(where + ": invalid section name");
            if (doc.sections_.count(current)) throw ConfigError(where + ": duplicate section [" + current + "]");
            doc.sections_[current];
            in_section = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
        if (!in_section) throw ConfigError(where + ": key outside of a section");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (!valid_name(key)) throw ConfigError(where + ": invalid key");
        if (value.empty()) throw ConfigError(where + ": empty value for " + key);
        auto& sec = doc.sections_[current];
        if (sec.count(key)) throw ConfigError(where + ": duplicate key " + key);
        sec[key] = value;
    }
    return doc;
}

ConfigDoc ConfigDoc::load(const std::filesystem::path& path) { return parse(read_file(path)); }

bool ConfigDoc::has(const std::string& section, const std::string& key) const { return get(section, key).has_value(); }

std::optional<std::string> ConfigDoc::get(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
}

void ConfigDoc::set(const std::string& section, const std::string& key, std::string value) {
    sections_[section][key] = std::move(value);
}

double ConfigDoc::get_double(const std::string& section, const std::string& key, double fallback) const {
    const auto v = get(section, key);
    return v ? parse_double(*v, section + "." + key) : fallback;
}

double ConfigDoc::require_double(const std::string& section, const std::string& key) const {
    const auto v = get(section, key);
    if (!v) throw ConfigError("missing required value " + section + "." + key);
    return parse_double(*v, section + "." + key);
}

long long ConfigDoc::get_int(const std::string& section, const std::string& key, long long fallback) const {
    const auto v = get(section, key);
    return v ? parse_int(*v, section + "." + key) : fallback;
}

std::vector<double> ConfigDoc::get_doubles(const std::string& section, const std::string& key) const {
    const auto v = get(section, key);
    if (!v) throw ConfigError("missing required list " + section + "." + key);
    std::vector<double> out;
    std::istringstream in(*v);
    std::string tok;
    while (in >> tok) out.push_back(parse_double(tok, section + "." + key));
    return out;
}

void ConfigDoc::reject_unknown(const std::map<std::string, std::set<std::string>>& allowed) const {
    for (const auto& [name, sec] : sections_) {
        const auto a = allowed.find(name);
        if (a == allowed.end()) throw ConfigError("unknown config section [" + name + "]");
        for (const auto& [key, value] : sec)
            if (!a->second.count(key)) throw ConfigError("unknown config key " + name + "." + key);
    }
}

}  // namespace skewdiff
