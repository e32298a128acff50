#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace thawsim {

/// Entry point for the thawsim tool. args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

/// Usage text listing the subcommands.
std::string cli_synopsis();

} // namespace thawsim
