#include "isoyamabe/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return isoyamabe::cli::run(argc, argv, std::cout, std::cerr); }
