#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace itk::csv {

// Incremental RFC 4180 reader: quoted fields may contain commas, doubled
// quotes and embedded line breaks. Accepts LF and CRLF row terminators.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    // Next logical record, or nullopt at end of input.
    // Throws data_error on malformed quoting, tagged with the record number.
    std::optional<std::vector<std::string>> next_row();

    // 1-based number of the last record returned.
    size_t row_number() const { return row_number_; }

private:
    std::istream& in_;
    size_t row_number_ = 0;
};

// Quotes the field only when it contains a comma, quote or line break.
std::string escape_field(const std::string& field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace itk::csv
