#pragma once

#include "common/error.hpp"

#include <atomic>

namespace pgvlab {

// Process-wide stop flag. Safe to set from a signal handler.
inline std::atomic<bool> g_interrupt_flag{false};

inline void request_interrupt() noexcept { g_interrupt_flag.store(true, std::memory_order_relaxed); }
inline void clear_interrupt() noexcept { g_interrupt_flag.store(false, std::memory_order_relaxed); }
inline bool interrupt_requested() noexcept { return g_interrupt_flag.load(std::memory_order_relaxed); }

inline void throw_if_interrupted() {
  if (interrupt_requested()) throw InterruptedError("interrupted");
}

}  // namespace pgvlab
