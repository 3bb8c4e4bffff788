#include <iostream>

#include "dbnbeat/cli.hpp"

int main(int argc, char** argv) { return dbnbeat::run_cli(argc, argv, std::cout, std::cerr); }
