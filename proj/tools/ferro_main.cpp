#include <iostream>
#include <string>
#include <vector>

#include "ferro/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ferro::run(args, std::cout, std::cerr);
}
