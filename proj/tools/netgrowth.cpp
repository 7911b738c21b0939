#include "netgrowth/cli.hpp"

int main(int argc, char** argv) { return netgrowth::cli::run_cli(argc, argv); }
