#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mdaudit::csv {

using Row = std::vector<std::string>;

struct Document {
    std::vector<std::string> comments;  // '#' lines, marker and one space stripped
    Row header;
    std::vector<Row> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

// RFC 4180. Lines starting with '#' outside a quoted field are comments.
// Blank lines are skipped. Throws ParseError on an unterminated quote.
Document parse(std::string_view text, bool has_header = true);

std::string escape(std::string_view field);
std::string format_row(const Row& row);

class Writer {
public:
    void comment(std::string_view text);
    void row(const Row& r);
    const std::string& str() const { return out_; }

private:
    std::string out_;
};

}  // namespace mdaudit::csv
