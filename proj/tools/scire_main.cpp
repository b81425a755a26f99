#include <iostream>

#include "scire/cli.hpp"

int main(int argc, char** argv) { return scire::cli::run(argc, argv, std::cout, std::cerr); }
