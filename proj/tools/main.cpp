#include "cli.hpp"

int main(int argc, char** argv) { return tfw::cli::cli_main(argc, argv); }
