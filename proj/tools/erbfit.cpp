#include "erbfit/cli.hpp"

int main(int argc, char** argv) { return erbfit::run_cli(argc, argv); }
