#include <iostream>

#include "psmco/harness.hpp"

int main(int argc, char** argv) { return psmco::harness::run_cli(argc, argv, std::cout, std::cerr); }
