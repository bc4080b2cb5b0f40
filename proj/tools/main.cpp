#include "cli.hpp"

int main(int argc, char** argv) { return sparseproj::cli::run_cli(argc, argv); }
