#include <string>
#include <vector>

#include "qfpc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return qfpc::cli_run(args);
}
