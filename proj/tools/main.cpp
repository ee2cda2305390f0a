#include "nfp/cli.hpp"

int main(int argc, char** argv) { return nfp::cli_main(argc, argv); }
