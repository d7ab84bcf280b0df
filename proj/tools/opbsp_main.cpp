#include <iostream>

#include "opbsp/cli.hpp"

int main(int argc, char** argv) { return opbsp::run_cli(argc, argv, std::cout, std::cerr); }
