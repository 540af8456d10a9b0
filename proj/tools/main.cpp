#include "commands.hpp"

int main(int argc, char** argv) { return ada::cli::run(argc, argv); }
