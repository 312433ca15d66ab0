// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

use clap::Parser;

fn main() {
    let cli = rabi_sweep::cli::Cli::parse();
    std::process::exit(rabi_sweep::cli::run(cli));
}
