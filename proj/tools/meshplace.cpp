#include <iostream>

#include "meshplace/commands.hpp"

int main(int argc, char** argv) { return meshplace::cli::run(argc, argv, std::cout, std::cerr); }
