#include "xsum/cli.hpp"

int main(int argc, char** argv) { return xsum::run_cli(argc, argv); }
