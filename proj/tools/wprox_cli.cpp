#include "wprox/harness/cli.hpp"

int main(int argc, char** argv) { return wprox::harness::cli_main(argc, argv); }
