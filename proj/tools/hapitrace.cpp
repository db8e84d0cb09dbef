#include "hapi/cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return hapi::cli::run_cli(argc, argv, std::cout, std::cerr); }
