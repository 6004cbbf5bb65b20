#include "glh/cli/app.hpp"

int main(int argc, char** argv) { return glh::cli::run_cli(argc, argv); }
