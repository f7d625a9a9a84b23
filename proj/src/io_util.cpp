#include "emosig/io_util.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "emosig/error.hpp"

namespace emosig {

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open file '{}'", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error(fmt::format("cannot read file '{}'", path.string()));
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write file '{}'", path.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(fmt::format("short write to '{}'", path.string()));
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

std::string_view trim(std::string_view s) {
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split(std::string_view s, char delim) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(delim, start);
        if (pos == std::string_view::npos) {
            parts.emplace_back(s.substr(start));
            break;
        }
        parts.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

std::pair<std::size_t, std::size_t> line_col_at(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

namespace {

// SAX pass that only looks for repeated keys inside one object.
class DuplicateKeyCheck : public nlohmann::json_sax<nlohmann::json> {
public:
    bool null() override { return true; }
    bool boolean(bool) override { return true; }
    bool number_integer(number_integer_t) override { return true; }
    bool number_unsigned(number_unsigned_t) override { return true; }
    bool number_float(number_float_t, const string_t&) override { return true; }
    bool string(string_t&) override { return true; }
    bool binary(binary_t&) override { return true; }
    bool start_object(std::size_t) override {
        keys_.emplace_back();
        return true;
    }
    bool key(string_t& k) override {
        if (!keys_.back().insert(k).second) {
            duplicate = k;
            return false;
        }
        return true;
    }
    bool end_object() override {
        keys_.pop_back();
        return true;
    }
    bool start_array(std::size_t) override { return true; }
    bool end_array() override { return true; }
    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override { return false; }

    std::string duplicate;

private:
    std::vector<std::set<std::string>> keys_;
};

}  // namespace

nlohmann::json parse_json_strict(std::string_view text, const std::string& source) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        auto offset = e.byte > 0 ? e.byte - 1 : 0;
        auto [line, col] = line_col_at(text, offset);
        throw FormatError(source, line, col, "invalid JSON");
    }
    DuplicateKeyCheck check;
    nlohmann::json::sax_parse(text, &check);
    if (!check.duplicate.empty())
        throw ValidationError(fmt::format("{}: duplicate key '{}'", source, check.duplicate));
    return j;
}

std::vector<CsvRow> parse_csv(std::string_view text, const std::string& source, char sep) {
    std::vector<CsvRow> rows;
    std::size_t i = 0, line = 1;
    const std::size_t n = text.size();
    while (i < n) {
        CsvRow row{line, {}};
        std::string field;
        bool in_quotes = false, quoted = false, row_done = false;
        std::size_t quote_line = line, quote_col = 1;
        while (i < n && !row_done) {
            char c = text[i];
            if (in_quotes) {
                if (c == '"') {
                    if (i + 1 < n && text[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                        continue;
                    }
                    in_quotes = false;
                    ++i;
                    continue;
                }
                if (c == '\n') ++line;
                field.push_back(c);
                ++i;
                continue;
            }
            if (c == '"' && field.empty() && !quoted) {
                in_quotes = quoted = true;
                quote_line = line;
                quote_col = line_col_at(text, i).second;
                ++i;
            } else if (c == sep) {
                row.fields.push_back(std::move(field));
                field.clear();
                quoted = false;
                ++i;
            } else if (c == '\r' && i + 1 < n && text[i + 1] == '\n') {
                ++i;
            } else if (c == '\n') {
                ++i;
                ++line;
                row_done = true;
            } else {
                field.push_back(c);
                ++i;
            }
        }
        if (in_quotes) throw FormatError(source, quote_line, quote_col, "unterminated quoted field");
        row.fields.push_back(std::move(field));
        if (row.fields.size() == 1 && row.fields[0].empty() && !quoted) continue;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string csv_escape(std::string_view field, char sep) {
    bool needs = field.find_first_of(std::string{sep, '"', '\n', '\r'}) != std::string_view::npos;
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_fixed(double value, int decimals) {
    std::string s = fmt::format("{:.{}f}", value, decimals);
    // Avoid "-0.000000" for tiny negatives produced by rounding.
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::string dump_canonical(const nlohmann::json& j) {
    // nlohmann::json objects are std::map-backed, so keys come out sorted.
    return j.dump(2) + "\n";
}

}  // namespace emosig
