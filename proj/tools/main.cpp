#include <iostream>

#include "upconv/cli.hpp"

int main(int argc, char** argv) { return upconv::cli_dispatch(argc, argv, std::cout, std::cerr); }
