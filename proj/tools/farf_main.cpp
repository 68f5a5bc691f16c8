#include <iostream>

#include "farf/cli.hpp"

int main(int argc, char** argv) { return farf::parse_and_dispatch(argc, argv, std::cout, std::cerr); }
