#include <iostream>

#include "qbs/cli.hpp"

int main(int argc, char** argv) { return qbs::cli::run(argc, argv, std::cout, std::cerr); }
