#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return gppsim::run_cli(argc, argv, std::cout, std::cerr); }
