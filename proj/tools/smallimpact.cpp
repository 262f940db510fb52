#include <iostream>

#include "smallimpact/cli.hpp"

int main(int argc, char** argv) { return smallimpact::run_cli(argc, argv, std::cout, std::cerr); }
