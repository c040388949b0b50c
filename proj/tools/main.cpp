#include "glyphforge/cli.hpp"

int main(int argc, char** argv) { return glyphforge::run_cli(argc, argv); }
