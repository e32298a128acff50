#include "thawsim/cli.hpp"

int main(int argc, char** argv) { return thawsim::cli_main(argc, argv); }
