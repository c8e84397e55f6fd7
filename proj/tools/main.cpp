#include "asr/harness.hpp"

int main(int argc, char** argv) { return asr::run_cli(argc, argv); }
