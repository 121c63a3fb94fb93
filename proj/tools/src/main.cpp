#include "commands.hpp"

int main(int argc, char** argv) { return pfml::cli::run_cli(argc, argv); }
