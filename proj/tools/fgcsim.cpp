#include <iostream>

#include "fgc/cli/commands.hpp"

int main(int argc, char** argv) { return fgc::cli::run_cli(argc, argv, std::cout, std::cerr); }
