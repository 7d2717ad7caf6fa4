#include "plseada/cli.hpp"

int main(int argc, char** argv) { return plseada::cli::run(argc, argv); }
