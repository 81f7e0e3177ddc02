#pragma once

#include "skewmix/model_state.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace skewmix {

// Delimited text (comma or tab, detected from the header). The first column
// is `sample_id`; sample ids map to 0-based indices by first appearance. The
// remaining columns are numeric markers.
Dataset read_dataset_csv(const std::string& path);
Dataset parse_dataset_csv(std::istream& in, const std::string& source = "<input>");

// Writes `data` in the format read_dataset_csv accepts. Values use the
// shortest decimal form that round-trips exactly.
void write_dataset_csv(const std::string& path, const Dataset& data);
void write_dataset_csv(std::ostream& out, const Dataset& data);

std::string format_double(double v);

// Splits one delimited line; no quoting beyond stripping a surrounding pair of
// double quotes from each field.
std::vector<std::string> split_fields(const std::string& line, char delim);

}  // namespace skewmix
