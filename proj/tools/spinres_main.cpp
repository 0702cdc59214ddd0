#include <iostream>

#include "spinres/cli.hpp"

int main(int argc, char** argv) { return spinres::cli::run(argc, argv, std::cout, std::cerr); }
