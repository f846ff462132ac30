/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <csignal>
#include <cstdlib>
#include <map>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <shardprof/comm.hpp>
#include <shardprof/error.hpp>

#include "cli.hpp"

namespace shardprof::cli {

namespace {

std::filesystem::path make_rendezvous_dir() {
    auto pattern = (std::filesystem::temp_directory_path() / "shardprof-rdv-XXXXXX").string();
    if (::mkdtemp(pattern.data()) == nullptr) {
        fail(ErrorKind::IoError, fmt::format("cannot create rendezvous directory {}", pattern));
    }
    return pattern;
}

int exit_code_of(int status) {
    if (WIFEXITED(status)) {
        return WEXITSTATUS(status);
    }
    return kExitRuntime;
}

}  // namespace

int launch_workers(
    std::filesystem::path const& executable, std::vector<std::string> const& argv, int world_size
) {
    auto const dir = make_rendezvous_dir();
    std::vector<char*> args;
    for (auto const& a : argv) {
        args.push_back(const_cast<char*>(a.c_str()));
    }
    args.push_back(nullptr);

    std::map<pid_t, int> running;
    for (int rank = 0; rank < world_size; ++rank) {
        pid_t const pid = ::fork();
        if (pid < 0) {
            FileCommunicator::abort(dir);
            for (auto const& [p, r] : running) {
                ::kill(p, SIGTERM);
            }
            fail(ErrorKind::IoError, "fork failed");
        }
        if (pid == 0) {
            ::setenv(kEnvRank, std::to_string(rank).c_str(), 1);
            ::setenv(kEnvWorldSize, std::to_string(world_size).c_str(), 1);
            ::setenv(kEnvRendezvous, dir.c_str(), 1);
            ::execv(executable.c_str(), args.data());
            std::_Exit(127);
        }
        running.emplace(pid, rank);
    }

    int result = kExitOk;
    while (!running.empty()) {
        int status = 0;
        pid_t const pid = ::waitpid(-1, &status, 0);
        if (pid < 0) {
            break;
        }
        auto const it = running.find(pid);
        if (it == running.end()) {
            continue;
        }
        auto const rank = it->second;
        running.erase(it);
        auto const code = exit_code_of(status);
        if (code != kExitOk && result == kExitOk) {
            result = code;
            spdlog::error("worker {} exited with status {}; aborting the job", rank, code);
            FileCommunicator::abort(dir);
            for (auto const& [p, r] : running) {
                ::kill(p, SIGTERM);
            }
        }
    }
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
    return result;
}

}  // namespace shardprof::cli
