#include <iostream>
#include <string>
#include <vector>

#include "tgorder/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return tgorder::run_cli(args, std::cout, std::cerr);
}
