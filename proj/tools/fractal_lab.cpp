#include <iostream>

#include "cli_harness.hpp"

int main(int argc, char** argv) { return fractal_lab::cli::main_entry(argc, argv, std::cout, std::cerr); }
