#include <iostream>

#include "devassist/cli.hpp"

int main(int argc, char** argv) { return devassist::cli_main(argc, argv, std::cout, std::cerr); }
