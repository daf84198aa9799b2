#include "vibron/cli.hpp"

int main(int argc, char** argv) { return vibron::cli_main(argc, argv); }
