#include "dcwave/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return dcwave::run_cli(argc, argv, std::cout, std::cerr);
}
