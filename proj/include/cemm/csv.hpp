#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cemm {

// Minimal RFC-4180 reader: quoted fields, "" escapes, CRLF or LF endings.
// Returns one vector of fields per record; the final record may lack a
// trailing newline. Throws std::runtime_error on a malformed quote.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// Quotes a field when it contains a comma, quote, or newline.
std::string csv_escape(std::string_view field);

std::string read_file(const std::string& path);

}  // namespace cemm
