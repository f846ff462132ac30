/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace shardprof::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `shardprof` executable.
int main(int argc, char** argv);

/**
 * @brief Re-run `argv` as `world_size` worker processes sharing a fresh
 * rendezvous directory. On the first failing worker the job is aborted and
 * the remaining workers are terminated.
 *
 * @return 0 when every worker succeeded, else the first failing exit code.
 */
int launch_workers(std::filesystem::path const& executable, std::vector<std::string> const& argv, int world_size);

}  // namespace shardprof::cli
