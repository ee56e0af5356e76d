#include <iostream>

#include "mlenkbf/cli.hpp"

int main(int argc, char** argv) { return mlenkbf::dispatch(argc, argv, std::cout, std::cerr); }
