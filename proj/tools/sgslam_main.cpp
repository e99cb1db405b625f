// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/cli/commands.hpp"

int main(int argc, char** argv) { return sgslam::cli_dispatch(argc, argv); }
