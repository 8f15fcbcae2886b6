#include <iostream>

#include "dpd_cli/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return dpd::cli::run_cli(args, std::cout, std::cerr);
}
