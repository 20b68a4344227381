#include "masskit/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return masskit::run_cli(argc, argv, std::cout, std::cerr); }
