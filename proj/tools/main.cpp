#include "locfft/cli.hpp"

int main(int argc, char** argv) { return locfft::run_cli(argc, argv); }
