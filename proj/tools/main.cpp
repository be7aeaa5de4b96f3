#include <iostream>

#include "egr/cli.hpp"

int main(int argc, char** argv) { return egr::run_cli(argc, argv, std::cout, std::cerr); }
