#include "resonavis/cli.hpp"

int main(int argc, char** argv) { return resonavis::run_cli(argc, argv); }
