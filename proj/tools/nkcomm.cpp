#include <nkcomm/cli.hpp>

int main(int argc, char** argv)
{
    return nkcomm::cli::run(argc, argv);
}
