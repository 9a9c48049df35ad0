#include <iostream>

#include "toff/commands.hpp"

int main(int argc, char** argv) { return toff::run_cli(argc, argv, std::cout, std::cerr); }
