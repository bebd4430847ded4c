#include "mdaudit/csv.hpp"

#include "mdaudit/error.hpp"

namespace mdaudit::csv {

Document parse(std::string_view text, bool has_header) {
    Document doc;
    std::size_t i = 0, line = 1;
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;
    bool header_done = !has_header;
    while (i < text.size()) {
        std::size_t row_line = line;
        if (text[i] == '\n' || text[i] == '\r') {
            if (text[i] == '\n') ++line;
            ++i;
            continue;
        }
        if (text[i] == '#') {
            std::size_t e = text.find('\n', i);
            if (e == std::string_view::npos) e = text.size();
            std::string_view c = text.substr(i + 1, e - i - 1);
            if (!c.empty() && c.back() == '\r') c.remove_suffix(1);
            if (!c.empty() && c.front() == ' ') c.remove_prefix(1);
            doc.comments.emplace_back(c);
            i = e;
            continue;
        }
        Row row;
        std::string field;
        bool quoted = false, was_quoted = false;
        for (;;) {
            if (i >= text.size()) {
                if (quoted) throw ParseError("unterminated quoted field at line " + std::to_string(row_line));
                row.push_back(std::move(field));
                break;
            }
            char c = text[i];
            if (quoted) {
                if (c == '"') {
                    if (i + 1 < text.size() && text[i + 1] == '"') {
                        field += '"';
                        i += 2;
                    } else {
                        quoted = false;
                        ++i;
                    }
                } else {
                    if (c == '\n') ++line;
                    field += c;
                    ++i;
                }
                continue;
            }
            if (c == '"' && field.empty() && !was_quoted) {
                quoted = was_quoted = true;
                ++i;
            } else if (c == ',') {
                row.push_back(std::move(field));
                field.clear();
                was_quoted = false;
                ++i;
            } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
                ++i;
            } else if (c == '\n') {
                row.push_back(std::move(field));
                ++i;
                ++line;
                break;
            } else {
                field += c;
                ++i;
            }
        }
        if (!header_done) {
            doc.header = std::move(row);
            header_done = true;
        } else {
            doc.rows.push_back(std::move(row));
            doc.line_numbers.push_back(row_line);
        }
    }
    return doc;
}

std::string escape(std::string_view field) {
    bool quote = field.find_first_of(",\"\r\n") != std::string_view::npos || (!field.empty() && field[0] == '#');
    if (!quote) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string format_row(const Row& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += escape(row[i]);
    }
    return out;
}

void Writer::comment(std::string_view text) {
    out_ += "# ";
    out_ += text;
    out_ += '\n';
}

void Writer::row(const Row& r) {
    out_ += format_row(r);
    out_ += '\n';
}

}  // namespace mdaudit::csv
