#include "cli.hpp"

int main(int argc, char** argv) { return nhdyn::cli::cli_main(argc, argv); }
