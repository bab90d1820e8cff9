#include "crispy/profiler.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace crispy {

namespace {

using Clock = std::chrono::steady_clock;

std::size_t count_occurrences(const std::string& text, const std::string& token) {
    std::size_t count = 0;
    for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + token.size())) {
        ++count;
    }
    return count;
}

std::string replace_once(std::string text, const std::string& token, const std::string& value) {
    const auto pos = text.find(token);
    if (pos != std::string::npos) text.replace(pos, token.size(), value);
    return text;
}

void kill_group(pid_t pid, int sig) {
    ::kill(-pid, sig);  // ESRCH is fine: the group is already gone
}

pid_t spawn_job(const JobSpec& job, const std::string& command) {
    int err_pipe[2];
    if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
        throw std::runtime_error(std::string("pipe2 failed: ") + std::strerror(errno));
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
        const int e = errno;
        ::close(err_pipe[0]);
        ::close(err_pipe[1]);
        throw std::runtime_error(std::string("fork failed: ") + std::strerror(e));
    }
    if (pid == 0) {
        ::close(err_pipe[0]);
        ::setpgid(0, 0);
        if (!job.working_dir.empty() && ::chdir(job.working_dir.c_str()) != 0) {
            const int e = errno;
            (void)!::write(err_pipe[1], &e, sizeof e);
            ::_exit(127);
        }
        for (const auto& [key, value] : job.environment) {
            ::setenv(key.c_str(), value.c_str(), 1);
        }
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        const int e = errno;
        (void)!::write(err_pipe[1], &e, sizeof e);
        ::_exit(127);
    }
    ::close(err_pipe[1]);
    ::setpgid(pid, pid);  // either side may win the race; both set the same group
    int child_errno = 0;
    const ssize_t n = ::read(err_pipe[0], &child_errno, sizeof child_errno);
    ::close(err_pipe[0]);
    if (n > 0) {
        int status = 0;
        ::waitpid(pid, &status, 0);
        throw std::runtime_error(std::string("failed to launch job: ") + std::strerror(child_errno));
    }
    return pid;
}

}  // namespace

void JobSpec::validate() const {
    const auto sample_count = count_occurrences(command_template, "{sample}");
    if (sample_count != 1) {
        throw std::invalid_argument("job command template must contain exactly one {sample} placeholder, found " +
                                    std::to_string(sample_count));
    }
    if (count_occurrences(command_template, "{tuning}") > 1) {
        throw std::invalid_argument("job command template must contain at most one {tuning} placeholder");
    }
    if (!(timeout_seconds > 0.0)) throw std::invalid_argument("job timeout_seconds must be > 0");
}

void MonitorConfig::validate() const {
    if (poll_interval_ms < 50) throw std::invalid_argument("poll_interval_ms must be >= 50");
    if (baseline_window_ms < poll_interval_ms) {
        throw std::invalid_argument("baseline_window_ms must be >= poll_interval_ms");
    }
    if (settle_timeout_ms < 0) throw std::invalid_argument("settle_timeout_ms must be >= 0");
}

// Consecutive readings must stay within a small band for 600 ms before the
// baseline is taken; gives the system time to account memory released by the
// previous run. Returns on timeout regardless.
static void wait_for_settle(const MonitorConfig& monitor, const MemoryReader& reader) {
    if (monitor.settle_timeout_ms <= 0) return;
    const auto deadline = Clock::now() + std::chrono::milliseconds(monitor.settle_timeout_ms);
    constexpr int kStableSpanMs = 600;
    Bytes prev = reader();
    int stable_ms = 0;
    while (Clock::now() < deadline) {
        std::this_thread::sleep_for(std::chrono::milliseconds(monitor.poll_interval_ms));
        const Bytes current = reader();
        const Bytes diff = current > prev ? current - prev : prev - current;
        const Bytes band = std::max<Bytes>(2 * MiB, current / 1024);
        if (diff <= band) {
            stable_ms += monitor.poll_interval_ms;
            if (stable_ms >= kStableSpanMs) return;
        } else {
            stable_ms = 0;
        }
        prev = current;
    }
}

std::string render_command(const JobSpec& job, const std::string& sample_path) {
    job.validate();
    std::string command = replace_once(job.command_template, "{sample}", sample_path);
    std::string tuning;
    for (const auto& arg : job.runtime_tuning_args) {
        if (!tuning.empty()) tuning += ' ';
        tuning += arg;
    }
    if (count_occurrences(job.command_template, "{tuning}") == 1) {
        command = replace_once(command, "{tuning}", tuning);
    } else if (!tuning.empty()) {
        command += ' ';
        command += tuning;
    }
    return command;
}

Bytes capture_baseline(const MonitorConfig& monitor, const MemoryReader& reader) {
    monitor.validate();
    const int count = std::max(1, monitor.baseline_window_ms / monitor.poll_interval_ms);
    unsigned __int128 sum = 0;
    for (int i = 0; i < count; ++i) {
        if (i > 0) std::this_thread::sleep_for(std::chrono::milliseconds(monitor.poll_interval_ms));
        sum += reader();
    }
    sum += static_cast<unsigned>(count) / 2;  // round to nearest byte
    return static_cast<Bytes>(sum / static_cast<unsigned>(count));
}

ProfilingRun run_profiled(const JobSpec& job, const std::filesystem::path& sample_path, Bytes sample_bytes,
                          const MonitorConfig& monitor, const MemoryReader& reader,
                          std::optional<double> cancel_after_seconds) {
    job.validate();
    monitor.validate();
    if (!std::filesystem::exists(sample_path)) {
        throw std::runtime_error("sample does not exist: " + sample_path.string());
    }

    ProfilingRun run;
    run.sample_bytes = sample_bytes;
    wait_for_settle(monitor, reader);
    run.baseline_bytes = capture_baseline(monitor, reader);

    const std::string command = render_command(job, sample_path.string());
    const pid_t pid = spawn_job(job, command);
    const auto start = Clock::now();

    // Kills and reaps the child group if anything throws before the normal
    // reap happens.
    struct ChildGuard {
        pid_t pid;
        bool armed = true;
        ~ChildGuard() {
            if (!armed) return;
            kill_group(pid, SIGKILL);
            int status = 0;
            ::waitpid(pid, &status, 0);
        }
    };
    ChildGuard child_guard{pid};

    // The poller owns the append-only sample buffer until joined.
    std::mutex mu;
    std::condition_variable cv;
    bool stop = false;
    std::vector<MemorySample> samples;
    std::exception_ptr poll_error;

    // Joins the poller even when the wait loop throws.
    struct PollerGuard {
        std::mutex& mu;
        std::condition_variable& cv;
        bool& stop;
        std::thread& thread;
        ~PollerGuard() {
            {
                std::lock_guard<std::mutex> lock(mu);
                stop = true;
            }
            cv.notify_all();
            if (thread.joinable()) thread.join();
        }
    };

    std::thread poller([&] {
        std::unique_lock<std::mutex> lock(mu);
        auto next = start;
        while (!stop) {
            lock.unlock();
            Bytes used = 0;
            std::exception_ptr error;
            try {
                used = reader();
            } catch (...) {
                error = std::current_exception();
            }
            const auto elapsed =
                std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
            lock.lock();
            if (error) {
                poll_error = error;
                break;
            }
            samples.push_back(MemorySample{elapsed, used});
            next += std::chrono::milliseconds(monitor.poll_interval_ms);
            cv.wait_until(lock, next, [&] { return stop; });
        }
    });
    PollerGuard guard{mu, cv, stop, poller};

    const auto deadline = [&](double secs) {
        return start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(secs));
    };
    const auto timeout_at = deadline(job.timeout_seconds);
    const std::optional<Clock::time_point> cancel_at =
        cancel_after_seconds ? std::optional(deadline(*cancel_after_seconds)) : std::nullopt;

    int status = 0;
    std::optional<Clock::time_point> term_sent;
    bool kill_sent = false;
    for (;;) {
        const pid_t reaped = ::waitpid(pid, &status, WNOHANG);
        if (reaped == pid) {
            child_guard.armed = false;
            break;
        }
        if (reaped < 0 && errno != EINTR) {
            throw std::runtime_error(std::string("waitpid failed: ") + std::strerror(errno));
        }
        const auto now = Clock::now();
        if (!term_sent) {
            bool poll_failed;
            {
                std::lock_guard<std::mutex> lock(mu);
                poll_failed = poll_error != nullptr;
            }
            if (poll_failed) {
                kill_group(pid, SIGTERM);
                term_sent = now;
            } else if (cancel_at && now >= *cancel_at) {
                run.canceled = true;
                kill_group(pid, SIGTERM);
                term_sent = now;
            } else if (now >= timeout_at) {
                run.timed_out = true;
                kill_group(pid, SIGTERM);
                term_sent = now;
            }
        } else if (!kill_sent && now - *term_sent > std::chrono::seconds(2)) {
            kill_group(pid, SIGKILL);
            kill_sent = true;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    const auto end = Clock::now();
    kill_group(pid, SIGKILL);  // sweep any process left in the job's group

    {
        std::lock_guard<std::mutex> lock(mu);
        stop = true;
    }
    cv.notify_all();
    if (poller.joinable()) poller.join();

    if (poll_error) {
        std::rethrow_exception(poll_error);
    }

    run.duration_seconds =
        std::max(std::chrono::duration<double>(end - start).count(), 1e-3);
    if (WIFEXITED(status)) run.exit_status = WEXITSTATUS(status);
    else if (WIFSIGNALED(status)) run.exit_status = -WTERMSIG(status);
    else run.exit_status = -1;

    run.samples = std::move(samples);
    if (run.samples.empty()) {
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(end - start).count();
        run.samples.push_back(MemorySample{elapsed, reader()});
    }
    unsigned __int128 job_sum = 0;
    Bytes peak = 0;
    for (const auto& s : run.samples) {
        const Bytes over = s.used_bytes > run.baseline_bytes ? s.used_bytes - run.baseline_bytes : 0;
        peak = std::max(peak, over);
        job_sum += over;
    }
    run.peak_job_bytes = peak;
    run.mean_job_bytes = static_cast<Bytes>(job_sum / run.samples.size());
    return run;
}

ProfileResult profile_job(const JobSpec& job, const std::filesystem::path& dataset_path,
                          Bytes full_dataset_bytes, double base_fraction, const MonitorConfig& monitor,
                          const ProfileOptions& options, const MemoryReader& reader) {
    job.validate();
    monitor.validate();
    if (!(options.accept_min_seconds > 0.0) || !(options.accept_max_seconds > options.accept_min_seconds)) {
        throw std::invalid_argument("profile_job: invalid runtime-target window");
    }
    if (options.max_adjust_iterations < 1) {
        throw std::invalid_argument("profile_job: max_adjust_iterations must be >= 1");
    }
    std::error_code ec;
    const auto dataset_size = std::filesystem::file_size(dataset_path, ec);
    if (ec) throw std::runtime_error("cannot stat dataset: " + dataset_path.string() + ": " + ec.message());
    std::filesystem::create_directories(options.sample_dir);

    const auto log = [&](const std::string& msg) {
        if (options.log) options.log(msg);
    };
    const auto overall_start = Clock::now();

    const auto run_with_retry = [&](const std::filesystem::path& path, Bytes bytes,
                                    std::optional<double> cancel_after) {
        ProfilingRun run = run_profiled(job, path, bytes, monitor, reader, cancel_after);
        if (run.succeeded() || run.canceled) return run;
        log("run on " + path.filename().string() + " failed (exit status " +
            std::to_string(run.exit_status) + (run.timed_out ? ", timed out" : "") + "), retrying once");
        run = run_profiled(job, path, bytes, monitor, reader, cancel_after);
        if (run.succeeded() || run.canceled) return run;
        throw std::runtime_error("profiling run failed twice on " + path.string() + " (exit status " +
                                 std::to_string(run.exit_status) + (run.timed_out ? ", timed out" : "") + ")");
    };

    ProfileResult result;
    double fraction = base_fraction;
    SamplePlan plan;
    ProfilingRun largest_run;
    std::filesystem::path largest_path = options.sample_dir / "sample_5.dat";
    Bytes largest_actual = 0;
    bool accepted = false;

    for (int iteration = 0; iteration < options.max_adjust_iterations && !accepted; ++iteration) {
        plan = plan_samples(full_dataset_bytes, fraction);
        if (plan.sizes.back() > dataset_size) {
            throw std::runtime_error("largest sample (" + std::to_string(plan.sizes.back()) +
                                     " bytes) exceeds the local dataset (" + std::to_string(dataset_size) +
                                     " bytes); lower the base fraction or provide more data");
        }
        largest_actual = materialize_sample(dataset_path, plan.sizes.back(), largest_path, options.format);
        log("running largest sample: " + format_bytes(largest_actual) + " at fraction " +
            format_double(fraction));
        // Cancel a little past the window so an exactly-at-limit run counts
        // as acceptable rather than canceled.
        ProfilingRun run =
            run_with_retry(largest_path, largest_actual, options.accept_max_seconds + 0.5);
        if (run.canceled) {
            log("canceled after " + format_fixed(run.duration_seconds, 1) + " s, halving the fraction");
            result.adjustments.push_back(AdjustmentStep{fraction, run.duration_seconds, false});
            fraction /= 2.0;
            continue;
        }
        const auto adjusted = adjust_fraction_for_window(run.duration_seconds, fraction,
                                                         options.accept_min_seconds,
                                                         options.accept_max_seconds);
        if (!adjusted || *adjusted == fraction) {
            // Accepted, or clamped at the whole dataset with nothing left to double.
            result.adjustments.push_back(AdjustmentStep{fraction, run.duration_seconds, true});
            largest_run = std::move(run);
            accepted = true;
        } else {
            log("runtime " + format_fixed(run.duration_seconds, 1) + " s outside [" +
                format_fixed(options.accept_min_seconds, 0) + ", " +
                format_fixed(options.accept_max_seconds, 0) + "] s, adjusting fraction to " +
                format_double(*adjusted));
            result.adjustments.push_back(AdjustmentStep{fraction, run.duration_seconds, false});
            fraction = *adjusted;
        }
    }
    if (!accepted) {
        throw std::runtime_error("base-fraction adjustment did not converge in " +
                                 std::to_string(options.max_adjust_iterations) + " iterations");
    }

    result.plan = plan;
    result.accepted_fraction = fraction;
    for (int i = 0; i < 4; ++i) {
        const auto path = options.sample_dir / ("sample_" + std::to_string(i + 1) + ".dat");
        const Bytes actual =
            materialize_sample(dataset_path, plan.sizes[static_cast<std::size_t>(i)], path, options.format);
        log("running sample " + std::to_string(i + 1) + ": " + format_bytes(actual));
        result.runs.push_back(run_with_retry(path, actual, std::nullopt));
        result.sample_paths.push_back(path);
        result.actual_bytes.push_back(actual);
    }
    result.runs.push_back(std::move(largest_run));
    result.sample_paths.push_back(largest_path);
    result.actual_bytes.push_back(largest_actual);

    std::stable_sort(result.runs.begin(), result.runs.end(),
                     [](const ProfilingRun& a, const ProfilingRun& b) {
                         return a.sample_bytes < b.sample_bytes;
                     });
    result.total_seconds = std::chrono::duration<double>(Clock::now() - overall_start).count();
    return result;
}

}  // namespace crispy
