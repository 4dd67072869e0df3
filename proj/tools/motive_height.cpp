#include <iostream>

#include <motive_height/cli.hpp>

int main(int argc, char **argv)
{
    return motive_height::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
