#include <iostream>

#include "abm/cli.hpp"

int main(int argc, char** argv) { return abm::run_cli(argc, argv, std::cout, std::cerr); }
