#include "cli.hpp"

int main(int argc, char** argv) { return synthforge::cli::run(argc, argv); }
