#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ssm {

// Runs one ssmcascade command. args excludes the program name.
// Exit codes: 0 success, 1 numerical or verification failure,
// 2 usage or file error (message on err).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ssm
