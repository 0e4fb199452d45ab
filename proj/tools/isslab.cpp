#include "isslab/cli.hpp"

int main(int argc, char** argv) { return isslab::run_cli(argc, argv); }
