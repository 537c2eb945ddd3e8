// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cstdio>

int main(int, char**) {
    std::printf("echoscout: subcommands not wired yet\n");
    return 1;
}
