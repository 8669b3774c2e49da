#include "spp/cli.hpp"

int main(int argc, char** argv) { return spp::cli::main(argc, argv); }
