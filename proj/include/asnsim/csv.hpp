#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace asnsim {

// Splits one CSV record. Unquoted fields are views into `line`; fields that
// needed unescaping are views into `arena` (cleared on every call). Embedded
// newlines inside quoted fields are not supported — none of the formats this
// toolkit reads produce them. Returns false on broken quoting.
bool split_csv_fields(std::string_view line, std::vector<std::string_view>& fields,
                      std::string& arena);

// Quotes a value for CSV output when it contains a delimiter, quote or CR/LF.
std::string csv_escape(std::string_view value);

}  // namespace asnsim
