#include <iostream>

#include "rapidlearn/cli.hpp"

int main(int argc, char** argv) { return rapidlearn::run_cli(argc, argv, std::cout, std::cerr); }
