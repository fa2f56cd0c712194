#include <iostream>
#include <string>
#include <vector>

#include "blockreg/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return blockreg::run_cli(args, std::cout, std::cerr);
}
