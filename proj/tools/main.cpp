#include "dagsmooth/cli.hpp"

int main(int argc, char** argv) { return dagsmooth::run_cli(argc, argv); }
