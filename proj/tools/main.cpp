#include "commands.hpp"

int main(int argc, char** argv)
{
    return c3bf::cli::run(argc, argv);
}
