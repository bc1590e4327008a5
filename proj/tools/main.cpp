#include "tactsim/cli.hpp"

int main(int argc, char** argv) { return tactsim::cli_main(argc, argv); }
