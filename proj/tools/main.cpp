#include "commands.hpp"

int main(int argc, char** argv) { return gridsec::cli::run(argc, argv); }
