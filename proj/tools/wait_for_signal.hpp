#pragma once

#include <atomic>
#include <chrono>
#include <csignal>
#include <thread>

namespace tools {

inline std::atomic<bool> g_interrupted{false};

inline void wait_for_signal() {
  std::signal(SIGINT, [](int) { g_interrupted = true; });
  std::signal(SIGTERM, [](int) { g_interrupted = true; });
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

}  // namespace tools
