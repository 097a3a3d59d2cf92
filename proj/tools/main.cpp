#include "cli.hpp"

int main(int argc, char** argv) { return gazechain::cli::run_cli(argc, argv); }
