#include "cli.hpp"

int main(int argc, char** argv) { return bnls::cli::run_main(argc, argv); }
