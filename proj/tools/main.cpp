#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return vtour::cli::run(argc, argv, std::cout, std::cerr); }
