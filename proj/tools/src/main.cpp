#include <iostream>

#include "hypercal/cli.hpp"

int main(int argc, char** argv) { return hypercal::cli::run(argc, argv, std::cout, std::cerr); }
