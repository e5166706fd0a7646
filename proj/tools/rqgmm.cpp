#include <iostream>

#include "rqgmm/cli.hpp"

int main(int argc, char** argv) { return rqgmm::cli::run(argc, argv, std::cout, std::cerr); }
