#pragma once

#include <cstddef>
#include <string_view>

namespace archspace {

/// Writes "warning: <message>" to stderr unless warnings are silenced.
void log_warning(std::string_view message);
void set_warnings_enabled(bool enabled);
/// Number of log_warning calls so far, silenced or not.
std::size_t warning_count();

}  // namespace archspace
