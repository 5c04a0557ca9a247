#include "ctl/cli_io.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return ctl::run_cli(argc, argv, std::cout, std::cerr);
}
