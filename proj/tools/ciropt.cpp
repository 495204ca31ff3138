#include <iostream>

#include "ciropt/cli.hpp"

int main(int argc, char** argv) { return ciropt::cli::parse_and_dispatch(argc, argv, std::cout, std::cerr); }
