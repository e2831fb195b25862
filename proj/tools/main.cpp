#include <iostream>

#include "maxlow/cli.hpp"

int main(int argc, char** argv) { return maxlow::run_cli(argc, argv, std::cout, std::cerr); }
