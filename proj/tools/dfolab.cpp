#include "dfolab/cli.hpp"

int main(int argc, char** argv) { return dfolab::run_cli(argc, argv); }
