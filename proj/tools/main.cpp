#include "critwave/cli.hpp"

int main(int argc, char** argv) { return critwave::cli::dispatch(argc, argv); }
