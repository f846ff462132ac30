/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "cli.hpp"

int main(int argc, char** argv) {
    return shardprof::cli::main(argc, argv);
}
