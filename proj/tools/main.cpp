#include "commands.hpp"

int main(int argc, char** argv) { return ness::cli::main_entry(argc, argv); }
