#include <iostream>

#include "hiformer/cli.hpp"

int main(int argc, char** argv) { return hiformer::cli::run(argc, argv, std::cout, std::cerr); }
