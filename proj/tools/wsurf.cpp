#include "wsurf/cli.hpp"

int main(int argc, char** argv) { return wsurf::cli::run(argc, argv); }
