#include <iostream>

#include "tryon/cli.hpp"

int main(int argc, char** argv) { return tryon::cli::run(argc, argv, std::cout, std::cerr); }
