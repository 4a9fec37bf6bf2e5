#include <string>
#include <vector>

#include "snis/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return snis::run_cli(args);
}
