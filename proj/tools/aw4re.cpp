#include "aw4re/cli.hpp"

int main(int argc, char** argv) { return aw4re::run_cli(argc, argv); }
