#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nhdyn::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2 };

// args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace nhdyn::cli
