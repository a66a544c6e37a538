#include "dpt/cli.hpp"

int main(int argc, char** argv) { return dpt::cli::run(argc, argv); }
