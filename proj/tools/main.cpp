#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return qrw::run_cli(argc, argv, std::cin, std::cout, std::cerr); }
