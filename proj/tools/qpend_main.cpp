// Copyright (c) 2026 the qpend authors.
// SPDX-License-Identifier: Apache-2.0

#include "qpend/cli.hpp"

int main(int argc, char** argv) { return qpend::cli::main(argc, argv); }
