#include "addsel/cli.hpp"

int main(int argc, char** argv) { return addsel::cli::run(argc, argv); }
