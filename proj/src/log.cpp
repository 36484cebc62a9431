#include "archspace/log.hpp"

#include <atomic>
#include <iostream>

namespace archspace {

namespace {
std::atomic<bool> g_warnings{true};
std::atomic<std::size_t> g_count{0};
}

void log_warning(std::string_view message) {
  g_count.fetch_add(1, std::memory_order_relaxed);
  if (g_warnings.load(std::memory_order_relaxed)) std::cerr << "warning: " << message << '\n';
}

void set_warnings_enabled(bool enabled) { g_warnings.store(enabled, std::memory_order_relaxed); }

std::size_t warning_count() { return g_count.load(std::memory_order_relaxed); }

}  // namespace archspace
