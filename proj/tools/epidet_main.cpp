#include <iostream>

#include "epidet/cli.hpp"

int main(int argc, char** argv) { return epidet::cli::run(argc, argv, std::cout, std::cerr); }
