#include "acbc/cli.hpp"

int main(int argc, char** argv) { return acbc::cli::run(argc, argv); }
