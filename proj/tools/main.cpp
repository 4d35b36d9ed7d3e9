#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return robl1::cli::dispatch(argc, argv, std::cout, std::cerr); }
