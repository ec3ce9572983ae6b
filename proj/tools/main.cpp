#include <iostream>

#include "tygar/frontend.hpp"

int main(int argc, char** argv) { return tygar::run_cli(argc, argv, std::cout, std::cerr); }
