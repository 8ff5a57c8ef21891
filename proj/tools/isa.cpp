#include "isa/cli.hpp"

int main(int argc, char** argv) { return isa::cli::run(argc, argv); }
