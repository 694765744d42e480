#include "specstab/cli.hpp"

int main(int argc, char** argv) { return specstab::cli_main(argc, argv); }
