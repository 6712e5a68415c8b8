#include <iostream>
#include <string>
#include <vector>

#include "twentyq/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return twentyq::run_cli(args, std::cin, std::cout, std::cerr);
}
