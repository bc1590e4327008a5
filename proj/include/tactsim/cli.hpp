#pragma once

namespace tactsim {

// Entry point behind the tactsim binary. Exit codes: 0 success,
// 1 usage, 2 configuration, 3 runtime failure.
int cli_main(int argc, const char* const* argv);

}  // namespace tactsim
