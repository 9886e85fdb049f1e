#include "camal/cli/commands.hpp"

int main(int argc, char** argv) { return camal::cli::run(argc, argv); }
