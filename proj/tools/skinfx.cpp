#include <iostream>

#include "skinfx/cli.hpp"

int main(int argc, char** argv) { return skinfx::run_cli(argc, argv, std::cout, std::cerr); }
