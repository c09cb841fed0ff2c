#ifndef ATR_CLI_HPP
#define ATR_CLI_HPP

#include <ostream>

namespace atr {

// Exit codes shared by the subcommands.
enum ExitCode : int {
    ExitOk = 0,
    ExitFailure = 1,     // type error, evaluation error, or a failing row
    ExitIo = 2,          // unreadable file or bad command line
    ExitUnsupported = 3, // verify: no bound for this program
};

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace atr

#endif
