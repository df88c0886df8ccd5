#include <iostream>

#include "valfun/cli.hpp"

int main(int argc, char** argv) { return valfun::run_cli(argc, argv, std::cout, std::cerr); }
