#include "jdpnet/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return jdp::cli::run(argc, argv, std::cout, std::cerr); }
