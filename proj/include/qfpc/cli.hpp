#ifndef QFPC_CLI_HPP
#define QFPC_CLI_HPP

#include <string>
#include <vector>

namespace qfpc {

/// Entry point behind the qfpc binary; also callable in-process by tests.
/// args excludes the program name.
int cli_run(const std::vector<std::string>& args);

}  // namespace qfpc

#endif  // QFPC_CLI_HPP
