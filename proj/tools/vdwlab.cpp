#include "vdwlab/cli.hpp"

int main(int argc, char** argv) { return vdwlab::cli::main_entry(argc, argv); }
