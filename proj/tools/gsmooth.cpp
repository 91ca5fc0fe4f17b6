#include "gsmooth/cli.hpp"

int main(int argc, char** argv) { return gsmooth::cli::main_entry(argc, argv); }
