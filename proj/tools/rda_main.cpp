#include "rda/cli.hpp"

int main(int argc, char** argv) { return rda::cli::run(argc, argv); }
