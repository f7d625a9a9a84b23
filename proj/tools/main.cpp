#include "commands.hpp"

int main(int argc, char** argv) { return emosig::cli::run(argc, argv); }
