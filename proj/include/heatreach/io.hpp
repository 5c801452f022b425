#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "heatreach/types.hpp"

namespace heatreach {

/// Raised for malformed or missing configuration values.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

inline double parse_double(const std::string& key, const std::string& text)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' is not a number: '" + text + "'");
    }
    if (used != text.size()) throw ConfigError("config: '" + key + "' is not a number: '" + text + "'");
    return v;
}

}  // namespace detail

/// Flat key = value configuration with dotted namespaces. '#' starts a
/// comment. Every read is recorded, so unread keys can be reported.
class Config {
public:
    static Config parse(const std::string& text)
    {
        Config c;
        std::istringstream is(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            c.set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
        }
        return c;
    }

    static Config load(const std::filesystem::path& path)
    {
        std::ifstream in(path);
        if (!in) throw ConfigError("config: cannot read " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    void set(const std::string& key, const std::string& value)
    {
        if (key.empty()) throw ConfigError("config: empty key");
        values_[key] = value;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key) const
    {
        const auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("config: missing required key '" + key + "'");
        used_.insert(key);
        return it->second;
    }
    std::string get_string(const std::string& key, const std::string& fallback) const
    {
        return has(key) ? get_string(key) : fallback;
    }

    double get_double(const std::string& key) const { return detail::parse_double(key, get_string(key)); }
    double get_double(const std::string& key, double fallback) const { return has(key) ? get_double(key) : fallback; }

    long get_int(const std::string& key) const
    {
        const double v = get_double(key);
        if (v != static_cast<double>(static_cast<long>(v))) throw ConfigError("config: '" + key + "' must be an integer");
        return static_cast<long>(v);
    }
    long get_int(const std::string& key, long fallback) const { return has(key) ? get_int(key) : fallback; }

    std::size_t get_size(const std::string& key) const
    {
        const long v = get_int(key);
        if (v < 0) throw ConfigError("config: '" + key + "' must be nonnegative");
        return static_cast<std::size_t>(v);
    }
    std::size_t get_size(const std::string& key, std::size_t fallback) const { return has(key) ? get_size(key) : fallback; }

    bool get_bool(const std::string& key, bool fallback) const
    {
        if (!has(key)) return fallback;
        const auto s = get_string(key);
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        throw ConfigError("config: '" + key + "' must be a boolean");
    }

    /// "a, b, c"
    std::vector<double> get_doubles(const std::string& key) const
    {
        std::vector<double> out;
        for (const auto& part : detail::split(get_string(key), ',')) out.push_back(detail::parse_double(key, part));
        return out;
    }

    /// "re, im" or a single real number
    Complex get_complex(const std::string& key) const
    {
        const auto v = get_doubles(key);
        if (v.size() == 1) return {v[0], 0.0};
        if (v.size() != 2) throw ConfigError("config: '" + key + "' must be 're, im'");
        return {v[0], v[1]};
    }
    Complex get_complex(const std::string& key, Complex fallback) const { return has(key) ? get_complex(key) : fallback; }

    /// "x1, y1; x2, y2; ..."
    std::vector<std::vector<double>> get_rows(const std::string& key) const
    {
        std::vector<std::vector<double>> out;
        for (const auto& row : detail::split(get_string(key), ';')) {
            if (row.empty()) continue;
            std::vector<double> r;
            for (const auto& part : detail::split(row, ',')) r.push_back(detail::parse_double(key, part));
            out.push_back(std::move(r));
        }
        return out;
    }

    std::vector<std::string> unused_keys() const
    {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_)
            if (!used_.count(k)) out.push_back(k);
        return out;
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

// ---------------------------------------------------------------- CSV

using CsvCell = std::variant<double, long long, std::string>;

/// Round-trippable text for a double (17 significant digits).
inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_cell(const CsvCell& c)
{
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    const auto& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + '"';
}

/// '#'-prefixed metadata lines, a header row and comma-separated rows.
struct CsvTable {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> header;
    std::vector<std::vector<CsvCell>> rows;

    void add_row(std::vector<CsvCell> row)
    {
        if (row.size() != header.size()) throw std::logic_error("csv: row width differs from header");
        rows.push_back(std::move(row));
    }

    std::string str() const
    {
        std::ostringstream os;
        for (const auto& [k, v] : metadata) os << "# " << k << ": " << v << '\n';
        for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_cell(r[i]);
            os << '\n';
        }
        return os.str();
    }

    void write(const std::filesystem::path& path) const
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("csv: cannot write " + path.string());
        out << str();
        if (!out) throw std::runtime_error("csv: write failed for " + path.string());
    }
};

/// Two whitespace-separated columns, no header beyond '#' comments.
inline void write_columns(const std::filesystem::path& path, const std::string& comment,
                          const std::vector<std::pair<double, double>>& data)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# " << comment << '\n';
    for (const auto& [a, b] : data) out << format_double(a) << ' ' << format_double(b) << '\n';
}

}  // namespace heatreach
