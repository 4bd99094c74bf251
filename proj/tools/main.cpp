#include "commands.hpp"

int main(int argc, char** argv) { return bernoulli::cli::run(argc, argv); }
