#include "sigmaflow/cli.hpp"

int main(int argc, char** argv) { return sigmaflow::run_cli(argc, argv); }
