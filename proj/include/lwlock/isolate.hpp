#ifndef LWLOCK_ISOLATE_HPP_
#define LWLOCK_ISOLATE_HPP_

#include <chrono>
#include <functional>
#include <string>

namespace lwlock {

/// Result of running a body in a forked child process.
struct IsolatedOutcome {
    enum class Status { kCompleted, kTimedOut, kFailed };

    Status status = Status::kFailed;
    std::string output;   ///< what the body returned (or the error text)
    double elapsed_s = 0.0;
};

/// Runs `body` in a forked child and returns its string result.
///
/// A child still running after `timeout` is killed and reported as
/// kTimedOut; this is how hung (deadlocked) runs are contained, since a
/// carrier stuck in a spin loop cannot be reclaimed in-process. Must be
/// called while no runtime is active in this process.
IsolatedOutcome run_isolated(const std::function<std::string()>& body,
                             std::chrono::duration<double> timeout);

}  // namespace lwlock

#endif  // LWLOCK_ISOLATE_HPP_
