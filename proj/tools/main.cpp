#include "parted/cli.hpp"

int main(int argc, char** argv) { return parted::cli_main(argc, argv); }
