#pragma once

namespace isslab {

/// Entry point of the isslab command-line tool. Returns 0 on success, 1 when
/// a reproduced claim fails, 2 on invalid configuration.
int run_cli(int argc, char** argv);

}  // namespace isslab
