#pragma once

#include "tebounds/simulate.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tebounds {

/// Plain-text DGP description: one `key = value` per line, `#` starts a
/// comment, lists are comma separated. A single value given for a
/// per-period list is repeated for every period. See docs/dgp_format.md.
DgpSpec parse_dgp_config(std::istream& in);
DgpSpec parse_dgp_config(std::string_view text);
std::string to_dgp_config(const DgpSpec& dgp);

/// Built-in DGPs, addressed on the command line as `preset:<name>`.
std::vector<std::string> preset_names();
DgpSpec preset_dgp(std::string_view name);

/// A file path or `preset:<name>`.
DgpSpec load_dgp(const std::string& where);

}  // namespace tebounds
