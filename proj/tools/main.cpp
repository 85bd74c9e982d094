#include "fpresample/harness.hpp"

int main(int argc, char** argv) { return fpresample::cli_main(argc, argv); }
