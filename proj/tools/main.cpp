#include "rrcd/cli.hpp"

int main(int argc, char** argv) { return rrcd::run_cli(argc, argv); }
