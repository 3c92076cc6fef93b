#include "lwlock/isolate.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstdio>
#include <exception>
#include <system_error>

namespace lwlock {
namespace {

void write_all(int fd, const std::string& data) {
    std::size_t done = 0;
    while (done < data.size()) {
        const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            return;
        }
        done += static_cast<std::size_t>(n);
    }
}

}  // namespace

IsolatedOutcome run_isolated(const std::function<std::string()>& body,
                             std::chrono::duration<double> timeout) {
    using Clock = std::chrono::steady_clock;

    std::array<int, 2> fds{};
    if (::pipe(fds.data()) != 0) {
        throw std::system_error(errno, std::generic_category(), "pipe");
    }
    std::fflush(stdout);
    std::fflush(stderr);

    const auto started = Clock::now();
    const pid_t pid = ::fork();
    if (pid < 0) {
        const int err = errno;
        ::close(fds[0]);
        ::close(fds[1]);
        throw std::system_error(err, std::generic_category(), "fork");
    }
    if (pid == 0) {
        ::close(fds[0]);
        int code = 0;
        try {
            write_all(fds[1], body());
        } catch (const std::exception& e) {
            write_all(fds[1], e.what());
            code = 2;
        } catch (...) {
            write_all(fds[1], "unknown exception");
            code = 2;
        }
        ::close(fds[1]);
        ::_exit(code);
    }

    ::close(fds[1]);
    IsolatedOutcome outcome;
    const auto deadline = started + std::chrono::duration_cast<Clock::duration>(timeout);
    bool timed_out = false;
    std::array<char, 4096> buffer{};
    while (true) {
        const auto now = Clock::now();
        if (now >= deadline) {
            timed_out = true;
            break;
        }
        const auto left =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
        pollfd pfd{fds[0], POLLIN, 0};
        const int ready = ::poll(&pfd, 1, static_cast<int>(left));
        if (ready < 0 && errno == EINTR) {
            continue;
        }
        if (ready <= 0) {
            continue;
        }
        const ssize_t n = ::read(fds[0], buffer.data(), buffer.size());
        if (n > 0) {
            outcome.output.append(buffer.data(), static_cast<std::size_t>(n));
            continue;
        }
        if (n < 0 && errno == EINTR) {
            continue;
        }
        break;  // EOF: the child is exiting
    }
    ::close(fds[0]);

    if (timed_out) {
        ::kill(pid, SIGKILL);
    }
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    outcome.elapsed_s = std::chrono::duration<double>(Clock::now() - started).count();

    if (timed_out) {
        outcome.status = IsolatedOutcome::Status::kTimedOut;
    } else if (WIFEXITED(status) && WEXITSTATUS(status) == 0) {
        outcome.status = IsolatedOutcome::Status::kCompleted;
    } else {
        outcome.status = IsolatedOutcome::Status::kFailed;
        if (WIFSIGNALED(status)) {
            outcome.output += "killed by signal " + std::to_string(WTERMSIG(status));
        }
    }
    return outcome;
}

}  // namespace lwlock
