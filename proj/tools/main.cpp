#include <iostream>

#include "uelicit/cli.hpp"

int main(int argc, char** argv)
{
    return uelicit::run_cli(argc, argv, std::cin, std::cout, std::cerr);
}
