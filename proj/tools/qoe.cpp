#include "qoe/cli/commands.hpp"

int main(int argc, char** argv) { return qoe::cli::run_cli(argc, argv); }
