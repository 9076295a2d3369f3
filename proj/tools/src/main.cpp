#include <iostream>

#include "scene_analogy_cli/cli.hpp"

int main(int argc, char** argv) {
    return scene_analogy::cli::run({argv, argv + argc}, std::cout, std::cerr);
}
