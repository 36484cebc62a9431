#include "archspace/cli.hpp"

int main(int argc, char** argv) { return archspace::run_cli(argc, argv); }
