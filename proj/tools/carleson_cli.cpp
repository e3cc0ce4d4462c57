#include "carleson/harness.hpp"

int main(int argc, char** argv) { return carleson::cli_main(argc, argv); }
