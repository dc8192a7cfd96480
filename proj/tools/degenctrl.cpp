#include <iostream>

#include "degenctrl/cli.hpp"

int main(int argc, char** argv) { return degenctrl::cli::run_cli(argc, argv, std::cout, std::cerr); }
