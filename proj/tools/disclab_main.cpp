#include <iostream>

#include "disclab/cli.hpp"

int main(int argc, char** argv) { return disclab::run_cli(argc, argv, std::cout, std::cerr); }
