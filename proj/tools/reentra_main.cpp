// SPDX-License-Identifier: Apache-2.0
#include "reentra/cli.hpp"

int main(int argc, char** argv) { return reentra::run_cli(argc, argv); }
