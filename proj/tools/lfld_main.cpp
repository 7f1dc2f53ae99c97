#include "lfld/cli.hpp"

int main(int argc, char** argv) { return lfld::cli_main(argc, argv); }
