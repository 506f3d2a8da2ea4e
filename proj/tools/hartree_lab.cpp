#include "hartree_lab/run.hpp"

int main(int argc, char **argv) { return hartree_lab::cli_main(argc, argv); }
