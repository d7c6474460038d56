#include "oba/cli.hpp"

int main(int argc, char** argv) { return oba::cli::run(argc, argv); }
