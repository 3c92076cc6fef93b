#ifndef LWLOCK_VERIFY_HPP_
#define LWLOCK_VERIFY_HPP_

// Correctness oracles. Live checks run the real runtime inside a forked
// child (see isolate.hpp) so a hang becomes a verdict instead of a stuck
// test process.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lwlock/backoff.hpp"
#include "lwlock/locks.hpp"

namespace lwlock::verify {

struct OracleReport {
    std::string name;
    std::string expected;
    std::string observed;
    bool pass = false;
};

/// Lock surface seen by the oracles, so a test double can stand in for a
/// real lock.
class LockUnderTest {
public:
    virtual ~LockUnderTest() = default;
    virtual void lock(LockNode& node) = 0;
    virtual void unlock(LockNode& node) = 0;
};

using LockFactory = std::function<std::unique_ptr<LockUnderTest>()>;

/// Factory for a named lock and strategy code.
LockFactory named_lock(const std::string& lock_name, const std::string& strategy,
                       const BackoffConfig& backoff = {});

using Seconds = std::chrono::duration<double>;

/// `tasks` tasks on `carriers` carriers each acquire the lock `iterations`
/// times. Inside the critical section a task raises an in-CS flag,
/// increments a shared counter with a plain load and store, yields, and
/// lowers the flag. Passes when the counter equals tasks * iterations and
/// the flag was never found raised.
OracleReport check_mutual_exclusion(const std::string& lock_name, const std::string& strategy,
                                    std::size_t carriers, std::size_t tasks,
                                    std::size_t iterations, Seconds timeout = Seconds(120));
OracleReport check_mutual_exclusion(const std::string& name, const LockFactory& factory,
                                    std::size_t carriers, std::size_t tasks,
                                    std::size_t iterations, Seconds timeout = Seconds(120));

/// Runs the parallelizable critical section `rounds` times per task. Passes
/// when every task finishes before `timeout`.
OracleReport check_deadlock_freedom(const std::string& lock_name, const std::string& strategy,
                                    std::size_t carriers, std::size_t tasks,
                                    Seconds timeout = Seconds(10), std::size_t rounds = 4);

/// Exhaustive interleavings of the park/wake handshake on a pure model of
/// the resume word and the task state machine.
OracleReport check_handshake_interleavings();

/// Model check of a waker that does a plain store instead of an exchange
/// and therefore never sees the handle. Used to show the model check can
/// fail; its report fails.
OracleReport check_handshake_interleavings_broken_waker();

/// Live handoffs through an MCS lock whose waiters park on the first
/// failed check (yield_limit = suspend_limit = 1).
OracleReport check_suspend_handoffs(std::size_t carriers, std::size_t tasks,
                                    std::size_t handoffs, Seconds timeout = Seconds(60));

/// Action log of one wait loop with a resume word, written as
/// "[spin 2, spin 4, yield, suspend-attempt]".
std::string format_trace(const BackoffTrace& trace);

/// Ladder for `config` and `strategy`, run for `steps` failed checks inside
/// a one-carrier runtime. A helper task wakes the waiter when it parks.
BackoffTrace record_ladder(const BackoffConfig& config, StrategyMask strategy,
                           std::uint32_t steps);

OracleReport check_backoff_ladder();

/// Single-queue FIFO check: one carrier, a global FIFO pool, `tasks`
/// waiters queue up behind a held lock in spawn order. Passes when the
/// acquisition order equals the queueing order.
OracleReport check_fifo_order(const std::string& lock_name, const std::string& strategy,
                              std::size_t tasks, Seconds timeout = Seconds(30));

struct MatrixRow {
    OracleReport report;
    bool expect_pass = true;
    bool as_expected() const { return report.pass == expect_pass; }
};

struct MatrixOptions {
    std::vector<std::size_t> me_carriers{1, 2, 4};
    std::vector<std::size_t> deadlock_carriers{1, 2, 3, 4};
    std::size_t tasks_factor = 8;  ///< deadlock cells use up to factor * carriers tasks
    std::size_t me_tasks = 8;
    std::size_t me_iterations = 10000;
    Seconds deadlock_timeout = Seconds(10);
    Seconds me_timeout = Seconds(120);
};

/// Strategy codes exercised for each lock. Suspend-only variants are
/// listed only where the lock has a resume word to park on.
std::vector<std::string> strategies_for(const LockSpec& spec);

/// Full verification matrix including the negative controls, which are
/// expected to fail. `progress` is called after each row.
std::vector<MatrixRow> run_matrix(const MatrixOptions& options = {},
                                  const std::function<void(const MatrixRow&)>& progress = {});

}  // namespace lwlock::verify

#endif  // LWLOCK_VERIFY_HPP_
