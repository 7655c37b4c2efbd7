// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "cycfuse/cli.hpp"

int main(int argc, char** argv) { return cycfuse::cli_main(argc, argv, std::cout, std::cerr); }
