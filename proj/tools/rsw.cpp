#include "rsw/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return rsw::cli::run(argc, argv, std::cout, std::cerr); }
