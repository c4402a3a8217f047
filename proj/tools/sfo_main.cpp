#include "sfo/cli.hpp"

int main(int argc, char** argv) { return sfo::run_cli(argc, argv); }
