#include "sonosim/cli.hpp"

int main(int argc, char** argv) { return sonosim::cli::run(argc, argv); }
