#include <vector>

#include "viexec/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return viexec::run_cli(args);
}
