#include <iostream>

#include "atr/cli.hpp"

int main(int argc, char** argv) { return atr::cli_main(argc, argv, std::cout, std::cerr); }
