#include <vector>

#include "qtl/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return qtl::cli::run(args);
}
