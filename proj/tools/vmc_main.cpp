#include <iostream>

#include "vmc/cli.hpp"

int main(int argc, char** argv) { return vmc::cli::run(argc, argv, std::cout, std::cerr); }
