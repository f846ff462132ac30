/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <gtest/gtest.h>

#include <shardprof/error.hpp>

#define EXPECT_ERROR_KIND(statement, expected_kind)                                       \
    do {                                                                                  \
        try {                                                                             \
            statement;                                                                    \
            ADD_FAILURE() << "expected " << ::shardprof::to_string(expected_kind)         \
                          << " from " #statement;                                         \
        } catch (::shardprof::Error const& e) {                                           \
            EXPECT_EQ(e.kind(), expected_kind) << e.what();                               \
        }                                                                                 \
    } while (0)
