#include <iostream>
#include <string>
#include <vector>

#include <ddedtm/cli.hpp>

int main(int argc, char **argv)
{
    return ddedtm::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
