// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(monotonic_control::experiments::cli::main_with_args(
        std::env::args_os(),
    ));
}
