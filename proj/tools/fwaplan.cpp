// SPDX-License-Identifier: Apache-2.0

#include "fwa/cli.hpp"

int main(int argc, char **argv) { return fwa::cli::run(argc, argv); }
