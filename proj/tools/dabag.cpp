#include <iostream>

#include "dabag/cli/app.hpp"

int main(int argc, char** argv) { return dabag::cli::run_cli(argc, argv, std::cout, std::cerr); }
