#include <iostream>

#include "tropic/cli.hpp"

int main(int argc, char** argv) { return tropic::run_cli(argc, argv, std::cout, std::cerr); }
