#include <vector>
#include <string>

#include "ringtrace/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ringtrace::run_cli(args);
}
