#include "pspin/cli.hpp"

int main(int argc, char** argv) { return pspin::cli::main_entry(argc, argv); }
