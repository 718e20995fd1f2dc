#include "entimg/cli.hpp"

int main(int argc, char** argv) { return entimg::run_cli(argc, argv); }
