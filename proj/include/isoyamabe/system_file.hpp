#pragma once

// Line-oriented `key = value` system definition files and the name resolver
// shared by the CLI.

#include "isoyamabe/system.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace isoyamabe {

/// Parses a system definition. Keys: name, dim, interval, b, a, s, volfactor,
/// kf, focal_codim. `#` starts a comment. Unknown or repeated keys are errors.
IsoparametricSystem parse_system_file(std::string_view text, const std::string& origin = "<input>");
IsoparametricSystem load_system_file(const std::string& path);

/// Serializes a system whose profiles are all printable expressions.
std::string write_system_file(const IsoparametricSystem& sys);

/// Resolves a catalog name (`sphere-x1-<n>`, `sphere-quad-<m>-<n>`),
/// `product:<base>+s<val>,v<val>,d<val>`, `round-product:<base>,m<m>,tau<val>`,
/// or a path to a system file.
IsoparametricSystem resolve_system(const std::string& spec);

/// Built-in entries listed by the `catalog` command.
std::vector<std::string> catalog_names();

}  // namespace isoyamabe
