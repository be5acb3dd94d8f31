#include "cli.hpp"

int main(int argc, char** argv) { return lswn::cli::run(argc, argv); }
