#pragma once

#include <string>
#include <vector>

namespace ringtrace {

/// Command-line driver. Returns 0 on success, 1 on validation failure,
/// 2 on usage errors.
int run_cli(const std::vector<std::string>& args);

} // namespace ringtrace
