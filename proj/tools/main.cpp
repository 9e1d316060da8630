#include "experiments.hpp"

int main(int argc, char** argv) { return qrec::cli::main_entry(argc, argv); }
