#include "agentmem_cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return agentmem::cli::run_cli(std::move(args), std::cout, std::cerr);
}
