#include "spinal/cli.hpp"

int main(int argc, char** argv) { return spinal::cli::run(argc, argv); }
