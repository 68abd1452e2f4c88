#include "arl/harness.hpp"

int main(int argc, char** argv) { return arl::run_cli(argc, argv); }
