#include "stgan/cli.hpp"

int main(int argc, char** argv) { return stgan::cli::run_cli(argc, argv); }
