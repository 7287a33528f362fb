#include <iostream>

#include "allowlab/cli.hpp"

int main(int argc, char** argv) { return allowlab::run_cli(argc, argv, std::cout, std::cerr); }
