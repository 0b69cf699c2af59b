#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <thread>

#include "semflow/errors.hpp"

namespace semflow {

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{100};
  std::chrono::milliseconds max_backoff{2000};
};

using SleepFn = std::function<void(std::chrono::milliseconds)>;

// Runs `attempt` up to 1 + max_retries times, doubling the delay after each
// RemoteUnavailable. The last failure is rethrown.
template <typename F>
auto with_retries(const RetryPolicy& policy, F&& attempt, const SleepFn& sleep = {})
    -> decltype(attempt()) {
  auto delay = policy.initial_backoff;
  for (int tries = 0;; ++tries) {
    try {
      return attempt();
    } catch (const RemoteUnavailable&) {
      if (tries >= policy.max_retries) throw;
    }
    if (sleep) {
      sleep(delay);
    } else {
      std::this_thread::sleep_for(delay);
    }
    delay = std::min(delay * 2, policy.max_backoff);
  }
}

}  // namespace semflow
