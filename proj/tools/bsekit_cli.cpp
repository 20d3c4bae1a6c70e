#include "bsekit/cli_bench.hpp"

#include <iostream>

int main(int argc, char** argv) { return bsekit::cli_main(argc, argv, std::cout, std::cerr); }
