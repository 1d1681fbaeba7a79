#include "piad/cli.hpp"

int main(int argc, char** argv) { return piad::cli::run(argc, argv); }
