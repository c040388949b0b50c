#pragma once

namespace glyphforge {

/// Exit codes: 0 success, 1 usage error, 2 runtime error.
int run_cli(int argc, char** argv);

}  // namespace glyphforge
