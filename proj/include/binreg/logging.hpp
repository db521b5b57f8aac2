#pragma once

#include <spdlog/spdlog.h>

namespace binreg {

// Shared stderr logger. Verbosity comes from the BINREG_LOG environment
// variable (trace, debug, info, warn, error, off); default is info.
spdlog::logger& log();

}  // namespace binreg
