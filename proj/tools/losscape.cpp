#include "losscape/cli.hpp"

int main(int argc, char** argv) { return losscape::cli::run(argc, argv); }
