#include "casim/cli.hpp"

int main(int argc, char** argv) { return casim::cli::run(argc, argv); }
