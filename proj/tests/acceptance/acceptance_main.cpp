// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Optional argument: substring filter on criterion names.

#include <cstdio>
#include <string>

#include "glcd/check.hpp"

int main(int argc, char** argv) {
    const std::string filter = argc > 1 ? argv[1] : "";
    int failed = 0;
    for (const auto& r : glcd::check::run_criteria(filter)) {
        std::printf("%s\n", glcd::check::format_result(r).c_str());
        std::fflush(stdout);
        if (!r.pass) ++failed;
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
