#include "nyqtune/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return nyqtune::cli::dispatch(args);
}
