#include "ifsmorph/cli.hpp"

int main(int argc, char** argv) { return ifsmorph::cli::run(argc, argv); }
